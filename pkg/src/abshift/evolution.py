"""Series form of the solution, its operator realization, and the supershift sum.

Everything here factors through the coefficients

    c_{m,l} = int_0^{2pi} int_0^inf exp(-M u^2 / (2 hbar t)) F_xi(r, phi, theta, t, u e^{i pi/4})
              cos^{m-l}(theta) sin^l(theta) u^{m+1} du dtheta,

which do not depend on (a, b).  One table of them per (physics, target,
truncation, quadrature) serves every (a, b) pair, so a supershift sum over
many sample frequencies costs one table plus cheap polynomial evaluations.
"""

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import abkernel, quadrature
from .errors import DomainError, SeriesTailError
from .iodo import OperatorIndex, operator_apply_at_zero
from .results import FieldValue
from .specfun import ln_gamma
from .summation import csum
from .superosc import EPS, EntireSeries, coefficients

MAX_SERIES_ORDER = 192
TABLE_BLOCK = 32  # tables are built for M_max rounded up to a multiple of this
OMEGA = 1j * quadrature.ROTATION  # i e^{i pi/4}


def log_moment_scale(cfg, m, rate=None):
    rate = cfg.gamma if rate is None else rate
    return ln_gamma((m + 2) / 2.0) - (m + 2) / 2.0 * math.log(rate) - math.log(2.0)


def moment_scale(cfg, m, rate=None):
    """Gamma((m+2)/2) / (2 rate**((m+2)/2)); rate defaults to M/(2 hbar t)."""
    return math.exp(log_moment_scale(cfg, m, rate))


def _angular_moment(m, l):
    # int_0^{2pi} cos^{m-l} sin^l
    p, q = m - l, l
    if p % 2 or q % 2:
        return 0.0
    return 2.0 * math.exp(ln_gamma((p + 1) / 2.0) + ln_gamma((q + 1) / 2.0)
                          - ln_gamma((p + q + 2) / 2.0))


@dataclass(frozen=True)
class CoefficientTable:
    cfg: abkernel.PhysicsConfig
    target: abkernel.PolarPoint
    M_max: int
    entries: dict
    error_estimates: dict
    K: float  # growth constant: |c_{m,l}| <= K * moment_scale(m, M/(4 hbar t))
    u_max: float
    winding: Optional[abkernel.WindingInfo]
    unit_kernel: bool = False
    tail_bounds: dict = field(default_factory=dict)

    def bound(self, m):
        return self.K * moment_scale(self.cfg, m, self.cfg.M / (4.0 * self.cfg.hbar * self.cfg.t))


def _step2_constant(cfg, r, U, unit_kernel):
    if unit_kernel:
        return 2.0 * math.pi
    q = cfg.M / (4.0 * cfg.hbar * cfg.t)
    u = np.linspace(0.0, U, 4001)
    vals = np.exp(-q * u * u) * abkernel.f_xi_bound(cfg, r, u)
    return 2.0 * math.pi * float(np.max(vals))


def _radial_weights(u, w, gamma, m):
    return w * np.exp((m + 1) * np.log(u) - gamma * u * u)


def _angular_sums(P, Fc, Ff, absFf):
    # theta reductions in fixed node order, independent of BLAS blocking and threads
    rows = P.shape[1]
    ang_c = np.zeros((rows, Fc.shape[1]), dtype=complex)
    ang_f = np.zeros((rows, Ff.shape[1]), dtype=complex)
    ang_h = np.zeros_like(ang_f)
    mag = np.zeros(ang_f.shape)
    for k in range(P.shape[0]):
        pk = P[k][:, None]
        ang_c += pk * Fc[k]
        term = pk * Ff[k]
        ang_f += term
        if k % 2 == 0:
            ang_h += term
        mag += np.abs(pk) * absFf[k]
    return ang_c, ang_f, ang_h, mag


def _row_dot(A, w):
    out = np.zeros(A.shape[0], dtype=A.dtype)
    for j in range(A.shape[1]):
        out += A[:, j] * w[j]
    return out


@lru_cache(maxsize=16)
def _build_table(cfg, target, M_max, trunc, spec, unit_kernel):
    gamma = cfg.gamma
    if unit_kernel:
        maj = quadrature.PolyExpMajorant(1.0, 0.0, 0.0)
    else:
        A, p, c = abkernel.f_xi_bound_majorant(cfg, target.r)
        maj = quadrature.PolyExpMajorant(A, p, c)

    # one cutoff good for every m: each radial tail below tol * moment scale
    if spec.u_max is not None:
        U = spec.u_max
    else:
        U = 0.0
        for m in range(M_max + 1):
            maj_m = quadrature.PolyExpMajorant(maj.A * 2.0 * math.pi, maj.p + m + 1, maj.c)
            U = max(U, quadrature.choose_u_max(gamma, maj_m, spec.tol * moment_scale(cfg, m)))

    if unit_kernel:
        theta, _ = quadrature.periodic_nodes(spec.n_theta)
        uc, wc = quadrature.gauss_legendre(spec.n_u, U)
        uf, wf = quadrature.gauss_legendre(2 * spec.n_u, U)
        Fc = np.ones((spec.n_theta, len(uc)), dtype=complex)
        Ff = np.ones((spec.n_theta, len(uf)), dtype=complex)
        winding, F_err = None, 0.0
    else:
        grid = quadrature.tabulate_winding(cfg, target, U, trunc, spec)
        theta, uc, wc, uf, wf = grid.theta, grid.u_coarse, grid.w_coarse, grid.u_fine, grid.w_fine
        Fc, Ff = grid.F_coarse, grid.F_fine
        winding = grid.winding
        F_err = winding.tail + winding.bessel_tail

    dtheta = 2.0 * math.pi / spec.n_theta
    cos, sin = np.cos(theta), np.sin(theta)
    absFf = np.abs(Ff)
    entries, errors, tails = {}, {}, {}
    for start in range(0, M_max + 1, TABLE_BLOCK):
        ms = range(start, min(start + TABLE_BLOCK, M_max + 1))
        mm = np.concatenate([np.full(m + 1, m) for m in ms])
        ll = np.concatenate([np.arange(m + 1) for m in ms])
        P = cos[:, None] ** (mm - ll)[None, :] * sin[:, None] ** ll[None, :]
        ang_c, ang_f, ang_h, mag = _angular_sums(P, Fc, Ff, absFf)
        pos = 0
        for m in ms:
            blk = slice(pos, pos + m + 1)
            pos += m + 1
            Rc = _radial_weights(uc, wc, gamma, m)
            Rf = _radial_weights(uf, wf, gamma, m)
            vc = dtheta * _row_dot(ang_c[blk], Rc)
            vf = dtheta * _row_dot(ang_f[blk], Rf)
            vh = 2.0 * dtheta * _row_dot(ang_h[blk], Rf)
            # first-order bound for the two reductions: (length) * eps * sum of |terms|
            rounding = (2.0 * (spec.n_theta + 2 * spec.n_u) * EPS * dtheta
                        * _row_dot(mag[blk], Rf))
            maj_m = quadrature.PolyExpMajorant(maj.A * 2.0 * math.pi, maj.p + m + 1, maj.c)
            tail = maj_m.tail_bound(U, gamma)
            wind = F_err * 2.0 * math.pi * float(np.sum(Rf))
            tails[m] = tail
            for k in range(m + 1):
                entries[(m, k)] = complex(vf[k])
                errors[(m, k)] = float(abs(vf[k] - vc[k]) + abs(vf[k] - vh[k]) + tail + wind
                                      + rounding[k])

    K = _step2_constant(cfg, target.r, U, unit_kernel)
    return CoefficientTable(cfg, target, M_max, entries, errors, K, U, winding,
                            unit_kernel, tails)


def coefficient_table(cfg, target, M_max, trunc=abkernel.WindingTruncation(),
                      spec=quadrature.QuadratureSpec(), unit_kernel=False):
    """c_{m,l} for all 0 <= l <= m <= M_max, cached per configuration.

    ``unit_kernel=True`` replaces F_xi by 1, which turns every entry into a
    closed-form Gaussian moment; it exists to test the machinery.
    """
    if M_max < 0:
        raise DomainError("M_max must be nonnegative")
    size = TABLE_BLOCK * math.ceil((M_max + 1) / TABLE_BLOCK) - 1
    return _build_table(cfg, target, size, trunc, spec, bool(unit_kernel))


def c_ml(cfg, target, m, l, trunc=abkernel.WindingTruncation(),
         spec=quadrature.QuadratureSpec(), unit_kernel=False):
    OperatorIndex(m, l)
    table = coefficient_table(cfg, target, m, trunc, spec, unit_kernel)
    return FieldValue(table.entries[(m, l)], table.error_estimates[(m, l)],
                      terms_used=table.M_max,
                      tail_bounds={"radial_tail": table.tail_bounds[m], "u_max": table.u_max})


def series_tail_bound(K, S, cfg, M_max):
    """Bound on |sum_{m > M_max} (S^m / m!) K moment_scale(m, q)|, q = M/(4 hbar t)."""
    if S == 0:
        return 0.0
    q = cfg.M / (4.0 * cfg.hbar * cfg.t)
    m = M_max + 1
    ratio = S * math.sqrt((m + 2) / 2.0) / ((m + 1) * math.sqrt(q))
    if ratio >= 1.0:
        return math.inf
    log_first = math.log(K) + m * math.log(S) - ln_gamma(m + 1.0) + log_moment_scale(cfg, m, q)
    return math.exp(min(log_first, 700.0)) / (1.0 - ratio)


def required_order(K, S, cfg, tol, cap=MAX_SERIES_ORDER):
    """Smallest M_max whose series tail (with prefactor) is below ``tol``."""
    pref = cfg.prefactor()
    for M in range(cap + 1):
        if pref * series_tail_bound(K, S, cfg, M) <= tol:
            return M
    tail = pref * series_tail_bound(K, S, cfg, cap)
    raise SeriesTailError(
        f"series tail {tail:.3g} above tol {tol:g} even at M_max={cap}",
        achieved=tail, suggestion="reduce |a|+|b| or increase t")


def _prefactor(cfg, target):
    return 1j * cfg.prefactor() * cmath.exp(1j * cfg.M * target.r ** 2 / (2 * cfg.hbar * cfg.t))


def _scaled_powers(x, n):
    # x^k / k! for k = 0..n
    out = [1.0 + 0j]
    for k in range(1, n + 1):
        out.append(out[-1] * x / k)
    return out


def evaluate_series(table, a, b, M_max):
    """(value, error, magnitude) of the series at (a, b) through order M_max.

    ``error`` collects the table errors and rounding; the truncation tail is
    left to the caller.
    """
    pa, pb = _scaled_powers(complex(a), M_max), _scaled_powers(complex(b), M_max)
    terms, err = [], []
    w = 1.0 + 0j
    for m in range(M_max + 1):
        for l in range(m + 1):
            coef = w * pa[m - l] * pb[l]
            terms.append(coef * table.entries[(m, l)])
            err.append(abs(coef) * table.error_estimates[(m, l)])
        w *= OMEGA
    pref = _prefactor(table.cfg, table.target)
    mag = math.fsum(abs(t) for t in terms)
    value = pref * csum(terms)
    error = abs(pref) * (math.fsum(err) + 4 * EPS * mag)
    return complex(value), float(error), float(abs(pref) * mag)


def _resolve_order(table_K, S, cfg, M_max, tol):
    if M_max is None:
        return required_order(table_K, S, cfg, tol)
    tail = cfg.prefactor() * series_tail_bound(table_K, S, cfg, M_max)
    if tail > tol:
        try:
            need = required_order(table_K, S, cfg, tol)
            hint = f"use M_max >= {need}"
        except SeriesTailError:
            need, hint = None, "no M_max up to the cap suffices"
        raise SeriesTailError(
            f"series tail {tail:.3g} exceeds tol {tol:g} at M_max={M_max}; {hint}",
            achieved=tail, suggestion=need)
    return M_max


def _step2_K(cfg, target, trunc, spec):
    # K depends on u_max only through the sampling range; any table works
    return coefficient_table(cfg, target, 0, trunc, spec).K


def psi_series(cfg, a, b, target, M_max=None, trunc=abkernel.WindingTruncation(),
               spec=quadrature.QuadratureSpec()):
    """psi_{a,b} from its power series in (a, b).

    ``M_max=None`` picks the smallest order whose tail bound is below
    ``spec.tol``; an explicit order that misses the tolerance raises
    ``SeriesTailError`` carrying the order that would work.
    """
    S = abs(a) + abs(b)
    M = _resolve_order(_step2_K(cfg, target, trunc, spec), S, cfg, M_max, spec.tol)
    table = coefficient_table(cfg, target, M, trunc, spec)
    value, err, mag = evaluate_series(table, a, b, M)
    tail = cfg.prefactor() * series_tail_bound(table.K, S, cfg, M)
    return FieldValue(value, err + tail, terms_used=M + 1,
                      condition_number=mag / abs(value) if value != 0 else math.inf,
                      tail_bounds={"series_tail": tail, "table": err, "K": table.K})


def operator_consistency(a, g, h, m_check=4, cutoff=20):
    """max |G_{m,l} H_l e^{i a w}(0) - g(a)^{m-l} h(a)^l| over m <= m_check."""
    f = EntireSeries.exponential(a, cutoff)
    ga, ha = g(a), h(a)
    worst = 0.0
    for m in range(m_check + 1):
        for l in range(m + 1):
            op = operator_apply_at_zero(g, h, OperatorIndex(m, l), f,
                                        cutoff=max(len(g.coeffs), len(h.coeffs)), tol=math.inf)
            direct = ga ** (m - l) * ha ** l
            worst = max(worst, abs(op - direct) / max(1.0, abs(direct)))
    return worst


def psi_gh(cfg, a, g, h, target, M_max=None, trunc=abkernel.WindingTruncation(),
           spec=quadrature.QuadratureSpec(), m_check=4, cutoff=20):
    """psi evaluated at (g(a), h(a)), with an operator-action cross-check.

    The factors g(a)^{m-l} h(a)^l of the low-order terms are recomputed by
    applying the truncated operators to exp(i a w); the largest relative
    discrepancy is reported under ``tail_bounds['operator']``.
    """
    out = psi_series(cfg, g(a), h(a), target, M_max, trunc, spec)
    mismatch = operator_consistency(a, g, h, m_check, cutoff)
    flags = dict(out.flags, operator_mismatch=bool(mismatch > 1e-8))
    return FieldValue(out.value, out.error, out.terms_used, out.condition_number,
                      dict(out.tail_bounds, operator=mismatch), flags)


def _sample_points(spec):
    return [(spec.g(lam), spec.h(lam)) for lam in spec.frequencies()]


def _order_for(spec_list, cfg, target, trunc, qspec, M_max):
    K = _step2_K(cfg, target, trunc, qspec)
    S = 0.0
    for sp in spec_list:
        S = max(S, abs(sp.g(sp.a)) + abs(sp.h(sp.a)))
        S = max(S, max(abs(A) + abs(B) for A, B in _sample_points(sp)))
    return _resolve_order(K, S, cfg, M_max, qspec.tol)


def _supershift(cfg, spec, target, M, trunc, qspec, tol):
    table = coefficient_table(cfg, target, M, trunc, qspec)
    C = coefficients(spec.n, spec.a)
    parts, errs = [], []
    tail_total = 0.0
    for Cj, (A, B) in zip(C, _sample_points(spec)):
        v, e, _ = evaluate_series(table, A, B, M)
        tail = cfg.prefactor() * series_tail_bound(table.K, abs(A) + abs(B), cfg, M)
        parts.append(Cj * v)
        errs.append(abs(Cj) * (e + tail))
        tail_total += abs(Cj) * tail
    value = csum(parts)
    mag = math.fsum(abs(p) for p in parts)
    kappa = mag / abs(value) if value != 0 else math.inf
    error = math.fsum(errs) + 4 * EPS * mag
    flags = {"catastrophic_cancellation": bool(kappa * EPS > tol)}
    return FieldValue(value, error, terms_used=M + 1, condition_number=kappa,
                      tail_bounds={"series_tail": tail_total}, flags=flags)


def supershift_sum(cfg, spec, target, M_max=None, trunc=abkernel.WindingTruncation(),
                   qspec=quadrature.QuadratureSpec(), tol=1e-3):
    """Psi_n = sum_j C_j(n, a) psi_{g(l_j), h(l_j)}, l_j = 1 - 2j/n, from one shared table."""
    M = _order_for([spec], cfg, target, trunc, qspec, M_max)
    return _supershift(cfg, spec, target, M, trunc, qspec, tol)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    value: complex
    error: float  # |Psi_n - psi_{g(a),h(a)}|
    kappa: float
    estimate: float  # numerical error estimate of Psi_n itself
    flagged: bool  # kappa * eps exceeds the measured error


@dataclass(frozen=True)
class ConvergenceReport:
    limit: FieldValue
    rows: tuple

    def errors(self):
        return [row.error for row in self.rows]

    def decreasing(self):
        e = self.errors()
        return all(x > y for x, y in zip(e, e[1:]))


def supershift_convergence_report(cfg, spec, target, n_list, M_max=None,
                                  trunc=abkernel.WindingTruncation(),
                                  qspec=quadrature.QuadratureSpec(), tol=1e-3):
    """One row per n: distance of Psi_n from the limit psi_{g(a),h(a)} and kappa_n."""
    n_list = list(n_list)
    if not n_list or any(x >= y for x, y in zip(n_list, n_list[1:])):
        raise DomainError("n_list must be nonempty and strictly ascending")
    specs = [type(spec)(n, spec.a, spec.g, spec.h) for n in n_list]
    M = _order_for(specs, cfg, target, trunc, qspec, M_max)
    limit = psi_gh(cfg, spec.a, spec.g, spec.h, target, M, trunc, qspec)
    rows = []
    for sp in specs:
        val = _supershift(cfg, sp, target, M, trunc, qspec, tol)
        dist = abs(val.value - limit.value)
        rows.append(ConvergenceRow(sp.n, val.value, dist, val.condition_number, val.error,
                                   bool(val.condition_number * EPS > dist)))
    return ConvergenceReport(limit, tuple(rows))
