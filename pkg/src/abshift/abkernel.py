"""Aharonov-Bohm winding sum, its explicit growth bound, and the propagator.

The winding sum is

    F(r, phi, theta, t, rho) = sum_n exp(i n (phi - theta)) i**(-|n - xi|)
                               J_{|n - xi|}(M r rho / (hbar t))

for real or complex ``rho``.  Orders are visited in the order
n = 0, +1, -1, +2, -2, ... and accumulated with a compensated sum.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, SingularTime, WindingTailNotConverged
from .specfun import bessel_i, bessel_j, i_power, ln_gamma
from .summation import CompensatedSum

MAX_WINDING = 400


@dataclass(frozen=True)
class PhysicsConfig:
    M: float = 1.0
    hbar: float = 1.0
    t: float = 1.0
    xi: float = 0.0

    def __post_init__(self):
        if not self.t > 0:
            raise SingularTime(f"propagator is singular for t <= 0 (t={self.t!r})")
        if not (self.M > 0 and self.hbar > 0):
            raise DomainError("M and hbar must be positive")
        if not math.isfinite(self.xi):
            raise DomainError("flux parameter must be finite")

    @property
    def xi_i(self):
        return math.floor(self.xi)

    @property
    def xi_f(self):
        return self.xi - math.floor(self.xi)

    @property
    def gamma(self):
        """Gaussian rate M/(2 hbar t) of the rotated integrals."""
        return self.M / (2.0 * self.hbar * self.t)

    def bessel_scale(self, r):
        return self.M * r / (self.hbar * self.t)

    def prefactor(self):
        return self.M / (2.0 * math.pi * self.hbar * self.t)


@dataclass(frozen=True)
class PolarPoint:
    r: float
    phi: float = 0.0

    def __post_init__(self):
        if not self.r >= 0:
            raise DomainError(f"radius must be nonnegative, got {self.r!r}")
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * math.pi))


@dataclass(frozen=True)
class WindingTruncation:
    """Winding cutoff; ``N=None`` grows N until the tail bound meets ``tail_tol``."""

    N: Optional[int] = None
    tail_tol: float = 1e-14

    def __post_init__(self):
        if self.N is not None and self.N < 1:
            raise DomainError("winding cutoff N must be >= 1")


@dataclass(frozen=True)
class WindingInfo:
    N: int
    tail: float  # bound on the dropped orders |n| > N
    bessel_tail: float  # largest Bessel series tail among the kept orders


def winding_orders(xi, N):
    """(n, |n - xi|) for n = 0, 1, -1, 2, -2, ..., N, -N."""
    out = [(0, abs(xi))]
    for k in range(1, N + 1):
        out.append((k, abs(k - xi)))
        out.append((-k, abs(-k - xi)))
    return out


def winding_tail_bound(xi, N, zmax_abs, zmax_imag):
    """Bound on sum over |n| > N of |J_{|n - xi|}(z)|.

    Uses |J_nu(z)| <= |z/2|**nu exp(|Im z|) / Gamma(nu + 1) (nu >= -1/2) and a
    geometric majorant on each side.
    """
    if zmax_abs == 0.0:
        return 0.0
    X = zmax_abs / 2.0
    log_X = math.log(zmax_abs) - math.log(2.0)  # X itself may underflow
    total = 0.0
    for nu0 in (N + 1 - xi, N + 1 + xi):
        if nu0 < 0:
            return math.inf
        q = X / (nu0 + 1.0)
        if q >= 1.0:
            return math.inf
        log_term = nu0 * log_X + zmax_imag - ln_gamma(nu0 + 1.0)
        total += math.exp(log_term) / (1.0 - q)
    return total


def choose_winding_cutoff(xi, zmax_abs, zmax_imag, tail_tol):
    N = max(1, math.ceil(abs(xi)))
    while winding_tail_bound(xi, N, zmax_abs, zmax_imag) > tail_tol:
        N += 1
        if N > MAX_WINDING:
            raise WindingTailNotConverged(
                f"winding tail above {tail_tol:g} at N={MAX_WINDING}",
                achieved=winding_tail_bound(xi, N, zmax_abs, zmax_imag))
    return N


def winding_sum(cfg, r, alpha, rho, trunc=WindingTruncation(), full_output=False):
    """Vectorized winding sum over broadcast arrays ``alpha = phi - theta`` and ``rho``."""
    alpha = np.asarray(alpha, dtype=float)
    z = cfg.bessel_scale(r) * np.asarray(rho, dtype=complex)
    shape = np.broadcast_shapes(alpha.shape, z.shape)
    zabs = float(np.max(np.abs(z))) if z.size else 0.0
    zim = float(np.max(np.abs(z.imag))) if z.size else 0.0
    if trunc.N is None:
        N = choose_winding_cutoff(cfg.xi, zabs, zim, trunc.tail_tol)
    else:
        N = trunc.N
    tail = winding_tail_bound(cfg.xi, N, zabs, zim)
    if tail > trunc.tail_tol:
        raise WindingTailNotConverged(
            f"winding tail not converged at N={N}: estimate {tail:.3g} > {trunc.tail_tol:g}",
            achieved=tail)

    orders = winding_orders(cfg.xi, N)
    nus = np.array([nu for _, nu in orders]).reshape((-1,) + (1,) * z.ndim)
    table, info = bessel_j(nus, z[np.newaxis, ...], full_output=True)
    bessel_tail = float(np.max(info.tail)) if np.size(info.tail) else 0.0
    acc = CompensatedSum(shape)
    for k, (n, nu) in enumerate(orders):
        acc.add(np.exp(1j * n * alpha) * i_power(-nu) * table[k])
    value = acc.value
    if value.ndim == 0:
        value = complex(value)
    if full_output:
        return value, WindingInfo(N=N, tail=tail, bessel_tail=bessel_tail)
    return value


def f_xi(cfg, r, phi, theta, rho, trunc=WindingTruncation(), full_output=False):
    """Winding sum F_xi at one or many points; see :func:`winding_sum`."""
    alpha = np.subtract(phi, theta)
    return winding_sum(cfg, r, alpha, rho, trunc, full_output=full_output)


def f_xi_bound(cfg, r, rho_mag):
    """Explicit majorant of |F_xi| at |rho| = rho_mag (real or rotated rho).

    With y = M r rho / (4 hbar t):
        exp(y) I_0(2y) [ y**(1 - xi_f) (3 + y) + y**xi_f (3 + 2y) ]
    """
    rho_mag = np.asarray(rho_mag, dtype=float)
    if np.any(rho_mag < 0):
        raise DomainError("rho_mag must be nonnegative")
    y = cfg.bessel_scale(r) * rho_mag / 4.0
    xf = cfg.xi_f
    i0 = np.real(bessel_i(0.0, 2.0 * y))
    p1 = np.where(y == 0, 1.0 if xf == 1.0 else 0.0, y ** (1.0 - xf))
    p2 = np.where(y == 0, 1.0 if xf == 0.0 else 0.0, y ** xf)
    out = np.exp(y) * i0 * (p1 * (3.0 + y) + p2 * (3.0 + 2.0 * y))
    return float(out) if out.ndim == 0 else out


def f_xi_bound_majorant(cfg, r):
    """(A, p, c) with f_xi_bound(u) <= A (1 + u)**p exp(c u) for u >= 0."""
    k = cfg.bessel_scale(r) / 4.0
    return 6.0 * max(1.0, k) ** 2, 2.0, 3.0 * k


def kernel_K(cfg, target, source, trunc=WindingTruncation(), full_output=False):
    """Propagator K(r, phi; rho, theta, t) for real source radius."""
    rho = source.r
    F, info = f_xi(cfg, target.r, target.phi, source.phi, rho, trunc, full_output=True)
    phase = np.exp(1j * cfg.M * (rho ** 2 + target.r ** 2) / (2.0 * cfg.hbar * cfg.t))
    value = complex(cfg.prefactor() * phase * F)
    return (value, info) if full_output else value
