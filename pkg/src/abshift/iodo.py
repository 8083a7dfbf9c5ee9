"""Infinite-order differential operators on power series, B-norms of entire
functions of exponential type, and the continuity constant Lambda.

The operators are

    G_{m,l}(D) = (sum_u g_u / i**u D**u)**(m - l),
    H_l(D)     = (sum_v h_v / i**v D**v)**l,

and only the value of G_{m,l}(D) H_l(D) f at w = 0 is ever needed.  Since
D**s f(0) = s! f_s, that value is sum_s P_s f_s s! where P is the coefficient
sequence of the product of the two symbol polynomials.  Building P by
repeated convolution visits the multi-indices grouped by total degree.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import CutoffInsufficient, DomainError
from .specfun import ln_gamma
from .superosc import entire_eval
from .summation import csum

B_GRID = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OperatorIndex:
    m: int
    l: int

    def __post_init__(self):
        if not 0 <= self.l <= self.m:
            raise DomainError(f"need 0 <= l <= m, got m={self.m}, l={self.l}")


@dataclass(frozen=True)
class A1Witness:
    series: object
    B: float
    norm_estimate: float
    sample_radius: float
    samples: int


def spiral_samples(count, radius):
    """Deterministic nested sample set in the disc |w| <= radius.

    Point k sits at angle 2*pi*k*golden and radius R*sqrt(frac(k*golden));
    point 0 is the origin.  A larger ``count`` only adds points.
    """
    k = np.arange(count)
    frac = np.mod(k * _GOLDEN, 1.0)
    rad = radius * np.sqrt(frac)
    rad[1:] = np.where(rad[1:] == 0, radius, rad[1:])
    return rad * np.exp(2j * np.pi * k * _GOLDEN)


def a1_witness(series, B, samples=4096, radius=4.0):
    if not B > 0:
        raise DomainError("B must be positive")
    w = spiral_samples(samples, radius)
    vals = np.abs(entire_eval(series, w)) * np.exp(-B * np.abs(w))
    return A1Witness(series, B, float(np.max(vals)), radius, samples)


def a1_norm_estimate(series, B, samples=4096, radius=4.0):
    """Lower estimate of sup |f(w)| exp(-B |w|) from a spiral sample set."""
    return a1_witness(series, B, samples, radius).norm_estimate


def coeff_decay_certificate(series):
    """(C_f, b) with |f_j| <= C_f b**j / j! for every coefficient of ``series``.

    ``b`` is the smallest value of the grid 0.25, 0.5, ..., 8 (extended by
    doubling if needed) that is at least the declared decay rate of the
    unstored tail; exact polynomials have no tail, so the grid minimum works.
    """
    coeffs = series.coeffs
    if all(c == 0 for c in coeffs):
        raise DomainError("certificate needs at least one nonzero coefficient")
    floor = 0.0 if series.exact else series.decay_b
    grid = list(B_GRID)
    while grid[-1] < floor:
        grid.append(2 * grid[-1])
    b = next(x for x in grid if x >= floor)
    logs = [math.log(abs(c)) + ln_gamma(j + 1) - j * math.log(b)
            for j, c in enumerate(coeffs) if c != 0]
    C = math.exp(max(logs))
    if not series.exact and series.decay_C > 0:
        D = len(coeffs)
        ratio = series.decay_b / b
        C = max(C, series.decay_C * (ratio ** D if ratio > 0 else 0.0))
    return C, b


def _symbol(series, cutoff):
    c = np.array(series.coeffs[: cutoff + 1], dtype=complex)
    return c / (1j ** np.arange(len(c)))


def _poly_power_product(p, q, m_minus_l, l):
    out = np.array([1.0 + 0j])
    for _ in range(m_minus_l):
        out = np.convolve(out, p)
    for _ in range(l):
        out = np.convolve(out, q)
    return out


def _abs_sum(series, b, upto=None):
    c = series.coeffs if upto is None else series.coeffs[: upto + 1]
    return math.fsum(abs(x) * b ** u for u, x in enumerate(c))


def operator_apply_at_zero(g, h, idx, f, cutoff=12, tol=1e-12, full_output=False):
    """G_{m,l}(D_w) H_l(D_w) f(w) evaluated at w = 0.

    Each of the m symbol factors is truncated at degree ``cutoff``.  The
    neglected part is bounded with the decay certificate of ``f`` and
    ``CutoffInsufficient`` is raised when that bound exceeds ``tol``.
    """
    if cutoff < 0:
        raise DomainError("cutoff must be nonnegative")
    m, l = idx.m, idx.l
    P = _poly_power_product(_symbol(g, cutoff), _symbol(h, cutoff), m - l, l)
    D = len(f.coeffs)
    terms = [P[s] * f.coeffs[s] * math.factorial(s) for s in range(min(len(P), D))]
    value = csum(terms)

    if any(c != 0 for c in f.coeffs):
        C_f, b = coeff_decay_certificate(f)
        full = _abs_sum(g, b) ** (m - l) * _abs_sum(h, b) ** l
        cut = _abs_sum(g, b, cutoff) ** (m - l) * _abs_sum(h, b, cutoff) ** l
        tail = C_f * max(full - cut, 0.0)
        if not f.exact and len(P) > D:
            absP = _poly_power_product(np.abs(_symbol(g, cutoff)), np.abs(_symbol(h, cutoff)),
                                       m - l, l).real
            tail += C_f * math.fsum(absP[s] * b ** s for s in range(D, len(absP)))
    else:
        tail = 0.0
    if tail > tol:
        raise CutoffInsufficient(
            f"neglected terms bounded by {tail:.3g} > tol {tol:g} (cutoff={cutoff}, D={D})",
            achieved=tail)
    return (value, tail) if full_output else value


def step1_bound(g, h, idx, C_f, b):
    """C_f (sum |g_u| b^u)^(m-l) (sum |h_v| b^v)^l."""
    return C_f * _abs_sum(g, b) ** (idx.m - idx.l) * _abs_sum(h, b) ** idx.l


@dataclass(frozen=True)
class LambdaBound:
    value: float
    tail: float
    terms: int

    def __float__(self):
        return self.value


def lambda_bound(cfg, g, h, b, M_max):
    """Partial sum of Lambda through m = M_max and a tail bound.

    Lambda = sum_m Gamma((m+2)/2) / (2 q**((m+2)/2)) S**m / m!, with
    q = M / (4 hbar t) and S = sum |g_u| b^u + sum |h_v| b^v.  The tail uses
    Gamma(m/2 + 1) <= sqrt(m!), giving terms (S/sqrt q)**m / (2 q sqrt(m!)).
    """
    if not b > 0:
        raise DomainError("b must be positive")
    q = cfg.M / (4.0 * cfg.hbar * cfg.t)
    S = _abs_sum(g, b) + _abs_sum(h, b)
    terms = [1.0 / (2.0 * q)]
    if S > 0:
        lnS, lnq = math.log(S), math.log(q)
        for m in range(1, M_max + 1):
            terms.append(math.exp(ln_gamma((m + 2) / 2.0) - ln_gamma(m + 1.0) - math.log(2.0)
                                  - (m + 2) / 2.0 * lnq + m * lnS))
    value = math.fsum(terms)
    if S == 0:
        return LambdaBound(value, 0.0, M_max + 1)
    x = S / math.sqrt(q)
    ratio = x / math.sqrt(M_max + 2)
    if ratio >= 1.0:
        return LambdaBound(value, math.inf, M_max + 1)
    m = M_max + 1
    first = math.exp(m * math.log(x) - 0.5 * ln_gamma(m + 1.0)) / (2.0 * q)
    return LambdaBound(value, first / (1.0 - ratio), M_max + 1)
