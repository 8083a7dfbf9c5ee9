from dataclasses import dataclass, field


@dataclass(frozen=True)
class FieldValue:
    """A complex amplitude with an error estimate and how it was obtained."""

    value: complex
    error: float
    terms_used: int = 0
    condition_number: float = 1.0
    tail_bounds: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return abs(self.value)

    @property
    def real(self):
        return self.value.real

    @property
    def imag(self):
        return self.value.imag
