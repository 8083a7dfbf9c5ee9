"""Superoscillating sequences F_n, Y_n and the entire functions feeding them."""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .results import FieldValue
from .specfun import ln_gamma
from .summation import csum

EPS = np.finfo(float).eps
_TINY = 2.0 * math.ulp(0.0)


@dataclass(frozen=True)
class EntireSeries:
    """Truncated power series ``sum_j coeffs[j] * w**j`` of an entire function.

    ``decay_C`` and ``decay_b`` bound every coefficient of the represented
    function, stored or not: ``|c_j| <= decay_C * decay_b**j / j!``.  When
    ``exact`` is true the function is the stored polynomial itself and
    nothing is neglected beyond the last coefficient.
    """

    coeffs: tuple
    decay_C: float
    decay_b: float
    exact: bool = False

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coeffs)
        if not coeffs:
            coeffs = (0j,)
        object.__setattr__(self, "coeffs", coeffs)
        if self.decay_C < 0 or self.decay_b < 0:
            raise DomainError("decay constants must be nonnegative")
        for j, c in enumerate(coeffs):
            if c == 0:
                continue
            if self.decay_b == 0 or self.decay_C == 0:
                if j > 0 or abs(c) > self.decay_C * (1 + 1e-12):
                    raise DomainError(f"coefficient {j} violates the declared decay")
                continue
            # subnormal values carry an absolute rounding of about one unit
            lim = math.log(self.decay_C + _TINY) + j * math.log(self.decay_b) - ln_gamma(j + 1)
            if lim < 700 and abs(c) > math.exp(lim) * (1 + 1e-9) + _TINY:
                raise DomainError(f"coefficient {j} violates the declared decay")

    @classmethod
    def polynomial(cls, coeffs):
        coeffs = tuple(complex(c) for c in coeffs)
        # b = 1 always works for a polynomial
        C = max((abs(c) * math.factorial(j) for j, c in enumerate(coeffs)), default=0.0)
        return cls(coeffs, decay_C=C, decay_b=1.0, exact=True)

    @classmethod
    def exponential(cls, a, terms):
        """``exp(i a w)`` truncated to ``terms`` coefficients."""
        coeffs = []
        c = 1.0 + 0j
        for j in range(terms):
            coeffs.append(c)
            c = c * 1j * a / (j + 1)
        return cls(tuple(coeffs), decay_C=1.0, decay_b=abs(a))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, lam):
        return entire_eval(self, lam)

    def _combine(self, other, sign):
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0j,) * (n - len(self.coeffs))
        b = other.coeffs + (0j,) * (n - len(other.coeffs))
        coeffs = tuple(x + sign * y for x, y in zip(a, b))
        return EntireSeries(coeffs, self.decay_C + other.decay_C,
                            max(self.decay_b, other.decay_b),
                            exact=self.exact and other.exact)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def scale(self, c):
        return EntireSeries(tuple(c * x for x in self.coeffs),
                            abs(c) * self.decay_C, self.decay_b, self.exact)


def entire_eval(s, lam):
    """Horner evaluation of the stored truncation of ``s`` at ``lam``."""
    lam = np.asarray(lam, dtype=complex)
    acc = np.zeros(lam.shape, dtype=complex)
    for c in reversed(s.coeffs):
        acc = acc * lam + c
    return complex(acc) if acc.ndim == 0 else acc


IDENTITY = EntireSeries.polynomial((0, 1))
ZERO = EntireSeries.polynomial((0,))


@dataclass(frozen=True)
class SuperoscSpec:
    n: int
    a: float
    g: EntireSeries = IDENTITY
    h: EntireSeries = ZERO

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not math.isfinite(self.a):
            raise DomainError("a must be finite")

    @property
    def supershift_regime(self):
        return abs(self.a) > 1

    def frequencies(self):
        return [1.0 - 2.0 * j / self.n for j in range(self.n + 1)]


def coeff_C(n, j, a):
    """binom(n, j) ((1+a)/2)**(n-j) ((1-a)/2)**j.

    The binomial is exact and the product is formed directly when it is
    representable; otherwise sign and log-magnitude are combined.
    """
    if not 0 <= j <= n:
        raise DomainError(f"need 0 <= j <= n, got j={j}, n={n}")
    p, q = (1.0 + a) / 2.0, (1.0 - a) / 2.0
    if (p == 0.0 and j < n) or (q == 0.0 and j > 0):
        return 0.0
    binom = math.comb(n, j)
    try:
        value = float(binom) * p ** (n - j) * q ** j
        if math.isfinite(value) and (value != 0.0 and abs(value) > 1e-290):
            return value
    except OverflowError:
        pass
    sign = -1.0 if ((p < 0 and (n - j) % 2) != (q < 0 and j % 2)) else 1.0
    logmag = math.log(binom)
    if n - j:
        logmag += (n - j) * math.log(abs(p))
    if j:
        logmag += j * math.log(abs(q))
    return sign * math.exp(logmag)


def coefficients(n, a):
    return [coeff_C(n, j, a) for j in range(n + 1)]


def _weighted_exp_sum(weights, phases, tol):
    terms = [w * cmath.exp(1j * ph) for w, ph in zip(weights, phases)]
    value = csum(terms)
    scale = math.fsum(abs(t) for t in terms)
    kappa = scale / abs(value) if value != 0 else math.inf
    # each term carries a few ulps of its own magnitude; fsum adds nothing
    error = 8 * EPS * scale
    flags = {"catastrophic_cancellation": bool(kappa * EPS > tol)}
    return FieldValue(value, error, terms_used=len(terms),
                      condition_number=kappa, flags=flags)


def f_n(x, n, a, tol=1e-3):
    """F_n(x, a) = sum_j C_j(n, a) exp(i (1 - 2j/n) x)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    C = coefficients(n, a)
    phases = [(1.0 - 2.0 * j / n) * x for j in range(n + 1)]
    return _weighted_exp_sum(C, phases, tol)


def y_n(x, y, spec, tol=1e-3):
    """Y_n(x, y) = sum_j C_j exp(i g(l_j) x) exp(i h(l_j) y), l_j = 1 - 2j/n."""
    C = coefficients(spec.n, spec.a)
    phases = [spec.g(lam) * x + spec.h(lam) * y for lam in spec.frequencies()]
    return _weighted_exp_sum(C, phases, tol)


def y_limit(x, y, spec):
    return cmath.exp(1j * spec.g(spec.a) * x) * cmath.exp(1j * spec.h(spec.a) * y)


def moments(n, a, kmax):
    """sum_j C_j (1 - 2j/n)**k for k = 0 .. kmax, compensated."""
    C = coefficients(n, a)
    lam = [1.0 - 2.0 * j / n for j in range(n + 1)]
    return [math.fsum(c * l ** k for c, l in zip(C, lam)) for k in range(kmax + 1)]


def f_n_series(n, a, terms):
    """Taylor coefficients of F_n(w, a) as an entire function of w."""
    mu = moments(n, a, terms - 1)
    coeffs = [(1j ** k) * mu[k] / math.factorial(k) for k in range(terms)]
    scale = math.fsum(abs(c) for c in coefficients(n, a))
    return EntireSeries(tuple(coeffs), decay_C=scale, decay_b=1.0)
