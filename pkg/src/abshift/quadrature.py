"""Gaussian-damped radial quadrature, periodic angular quadrature, and the
rotated-contour solution psi_{a,b}.

Radial integrals over [0, inf) are cut at ``u_max`` and done with
Gauss-Legendre on the damped integrand.  The error estimate is the
difference between n and 2n nodes plus a rigorous bound on the cut tail.
The tail bound assumes a majorant |f(u)| <= A (1 + u)**p exp(c u): the log of
A (1+u)**p exp(c u - gamma u**2) is concave, so past the point where its
slope lam is negative the tail is at most integrand(U) / |lam(U)|.
"""

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import abkernel
from .errors import DomainError, QuadratureTailError
from .results import FieldValue
from .summation import CompensatedSum

ROTATION = cmath.exp(0.25j * math.pi)


@dataclass(frozen=True)
class QuadratureSpec:
    n_theta: int = 256
    n_u: int = 96
    u_max: Optional[float] = None
    tol: float = 1e-10

    def __post_init__(self):
        if self.n_theta < 4 or self.n_theta % 2:
            raise DomainError("n_theta must be even and >= 4")
        if self.n_u < 2:
            raise DomainError("n_u must be >= 2")
        if self.u_max is not None and not self.u_max > 0:
            raise DomainError("u_max must be positive")
        if not self.tol > 0:
            raise DomainError("tol must be positive")

    def refined(self, factor=2):
        return QuadratureSpec(self.n_theta * factor, self.n_u * factor, self.u_max, self.tol)


@dataclass(frozen=True)
class PolyExpMajorant:
    """|f(u)| <= A (1 + u)**p exp(c u) on u >= 0."""

    A: float
    p: float = 0.0
    c: float = 0.0

    def log_damped(self, u, gamma):
        return math.log(self.A) + self.p * math.log1p(u) + self.c * u - gamma * u * u

    def slope(self, u, gamma):
        return self.p / (1.0 + u) + self.c - 2.0 * gamma * u

    def tail_bound(self, U, gamma):
        lam = self.slope(U, gamma)
        if lam >= 0:
            return math.inf
        return math.exp(self.log_damped(U, gamma)) / -lam


def choose_u_max(gamma, majorant, tol):
    """Smallest U past the peak with damped majorant below tol/100 and tail below tol."""
    if majorant.A == 0:
        return 1.0
    # slope is decreasing; start where it turns negative
    lo = 0.0
    hi = max(1.0, (majorant.c + majorant.p) / gamma + 1.0)
    target = math.log(tol * 1e-2)

    def ok(U):
        return (majorant.slope(U, gamma) < 0
                and majorant.log_damped(U, gamma) < target
                and majorant.tail_bound(U, gamma) < tol)

    while not ok(hi):
        lo, hi = hi, 2.0 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@lru_cache(maxsize=64)
def _legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def gauss_legendre(n, u_max):
    x, w = _legendre(n)
    return x * u_max, w * u_max


def _ordered_dot(weights, values, axis=-1):
    # deterministic left-to-right compensated reduction along ``axis``
    values = np.moveaxis(np.asarray(values, dtype=complex), axis, -1)
    acc = CompensatedSum(values.shape[:-1])
    for k in range(values.shape[-1]):
        acc.add(weights[k] * values[..., k])
    return acc.value


def gauss_weighted_integral(f, gamma, spec=QuadratureSpec(), majorant=None):
    """Approximate the integral of exp(-gamma u^2) f(u) over [0, inf).

    ``f`` must accept a numpy array of nodes.  Either ``spec.u_max`` or a
    ``PolyExpMajorant`` for ``|f|`` is required; with a majorant the cut tail
    is bounded and must not exceed ``spec.tol``.
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if spec.u_max is None and majorant is None:
        raise DomainError("need spec.u_max or a majorant to place the cutoff")
    U = spec.u_max if spec.u_max is not None else choose_u_max(gamma, majorant, spec.tol)
    tail = majorant.tail_bound(U, gamma) if majorant is not None else None
    if tail is not None and tail > spec.tol:
        raise QuadratureTailError(
            f"tail beyond u_max={U:.4g} is {tail:.3g} > tol {spec.tol:g}", achieved=tail)
    vals = []
    for n in (spec.n_u, 2 * spec.n_u):
        u, w = gauss_legendre(n, U)
        vals.append(complex(_ordered_dot(w, np.exp(-gamma * u * u) * f(u))))
    err = abs(vals[1] - vals[0]) + (tail or 0.0)
    flags = {"tail_unbounded": tail is None}
    return FieldValue(vals[1], err, terms_used=2 * spec.n_u,
                      tail_bounds={"u_max": U, "radial_tail": tail or 0.0}, flags=flags)


def periodic_nodes(n_theta):
    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    return theta, 2.0 * math.pi / n_theta


def periodic_integral(f, n_theta):
    """Trapezoid rule for a 2*pi-periodic ``f`` on ``n_theta`` uniform nodes."""
    theta, w = periodic_nodes(n_theta)
    vals = np.asarray(f(theta), dtype=complex)
    out = complex(_ordered_dot(np.full(n_theta, w), vals))
    return out


def solution_majorant(cfg, r, a, b, extra_power=1.0):
    """Majorant of |F(u e^{i pi/4})| u**extra_power |exp(i u e^{i pi/4} w)|.

    For real a, b the exponential factor is at most exp(u (|a|+|b|)/sqrt 2);
    for complex parameters the cruder exp(u (|a|+|b|)) is used.
    """
    A, p, c = abkernel.f_xi_bound_majorant(cfg, r)
    return PolyExpMajorant(A, p + extra_power, c + _exponent_rate(a, b))


def _exponent_rate(a, b):
    s = abs(a) + abs(b)
    if complex(a).imag == 0 and complex(b).imag == 0:
        s /= math.sqrt(2.0)
    return s


@dataclass(frozen=True)
class AngularRadialGrid:
    """Winding sum tabulated on the rotated ray for one target point.

    ``F[k, j]`` is F(r, phi, theta_k, t, u_j e^{i pi/4}) where the u_j are
    the coarse (n_u) then the fine (2 n_u) Gauss-Legendre nodes.
    """

    theta: np.ndarray
    u_coarse: np.ndarray
    w_coarse: np.ndarray
    u_fine: np.ndarray
    w_fine: np.ndarray
    F: np.ndarray
    u_max: float
    winding: abkernel.WindingInfo

    @property
    def F_coarse(self):
        return self.F[:, : len(self.u_coarse)]

    @property
    def F_fine(self):
        return self.F[:, len(self.u_coarse):]


def tabulate_winding(cfg, target, U, trunc, spec):
    theta, _ = periodic_nodes(spec.n_theta)
    uc, wc = gauss_legendre(spec.n_u, U)
    uf, wf = gauss_legendre(2 * spec.n_u, U)
    u = np.concatenate([uc, uf])
    alpha = (target.phi - theta)[:, None]
    F, info = abkernel.winding_sum(cfg, target.r, alpha, (u * ROTATION)[None, :], trunc,
                                   full_output=True)
    return AngularRadialGrid(theta, uc, wc, uf, wf, np.asarray(F), U, info)


def psi_direct(cfg, a, b, target, trunc=abkernel.WindingTruncation(), spec=QuadratureSpec()):
    """psi_{a,b}(r, phi, t) from the rotated-contour double integral."""
    gamma = cfg.gamma
    maj = solution_majorant(cfg, target.r, a, b)
    if spec.u_max is None:
        U = choose_u_max(gamma, maj, spec.tol / (2.0 * math.pi))
    else:
        U = spec.u_max
    tail = maj.tail_bound(U, gamma) * 2.0 * math.pi
    if tail > spec.tol:
        raise QuadratureTailError(f"radial tail {tail:.3g} exceeds tol {spec.tol:g}",
                                  achieved=tail)
    grid = tabulate_winding(cfg, target, U, trunc, spec)
    th = grid.theta[:, None]
    dtheta = 2.0 * math.pi / spec.n_theta

    def radial(u, w, F):
        e = np.exp(1j * u[None, :] * ROTATION * (a * np.cos(th) + b * np.sin(th)))
        G = F * e * (np.exp(-gamma * u * u) * u)[None, :]
        full = _ordered_dot(np.full(spec.n_theta, dtheta), G, axis=0)
        half = _ordered_dot(np.full(spec.n_theta // 2, 2 * dtheta), G[::2], axis=0)
        return complex(_ordered_dot(w, full)), complex(_ordered_dot(w, half))

    qc, _ = radial(grid.u_coarse, grid.w_coarse, grid.F_coarse)
    qf, qf_half = radial(grid.u_fine, grid.w_fine, grid.F_fine)
    # absolute error of each F value, integrated against the rest of the integrand
    s = _exponent_rate(a, b)
    uf = grid.u_fine
    wind_err = (grid.winding.tail + grid.winding.bessel_tail) * 2.0 * math.pi * float(
        np.sum(grid.w_fine * uf * np.exp(-gamma * uf * uf + s * uf)))
    pref = 1j * cfg.prefactor() * cmath.exp(1j * cfg.M * target.r ** 2 / (2 * cfg.hbar * cfg.t))
    err_radial = abs(qf - qc)
    err_angular = abs(qf - qf_half)
    error = abs(pref) * (err_radial + err_angular + tail + wind_err)
    return FieldValue(
        pref * qf, error, terms_used=grid.winding.N,
        tail_bounds={"u_max": U, "radial_tail": abs(pref) * tail,
                     "radial_doubling": abs(pref) * err_radial,
                     "angular_halving": abs(pref) * err_angular,
                     "winding": abs(pref) * wind_err},
    )
