"""Log-gamma and Bessel functions of real nonnegative order.

Bessel functions are evaluated from the ascending power series only.  The
terms are generated and accumulated in double-double arithmetic, so the
cancellation of the alternating series for real arguments up to the
stability radius costs nothing visible in the final double result.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import summation as sm
from .errors import DomainError, TailNotConverged

STABILITY_RADIUS = 30.0
MAX_SERIES_TERMS = 400
# Relative floor of double-double arithmetic; summing below it is pointless.
_DD_FLOOR = 1e-30

# Rational Lanczos sum, g = 6.024680040776729583740234375, scaled by exp(-g).
# Coefficients ordered from the highest power of x down to the constant.
_LANCZOS_G = 6.024680040776729583740234375
_LANCZOS_NUM = (
    0.006061842346248906525783753964555936883222,
    0.5098416655656676188125178644804694509993,
    19.51992788247617482847860966235652136208,
    449.9445569063168119446858607650988409623,
    6955.999602515376140356310115515198987526,
    75999.29304014542649875303443598909137092,
    601859.6171681098786670226533699352302507,
    3481712.15498064590882071018964774556468,
    14605578.08768506808414169982791359218571,
    43338889.32467613834773723740590533316085,
    86363131.28813859145546927288977868422342,
    103794043.1163445451906271053616070238554,
    56906521.91347156388090791033559122686859,
)
_LANCZOS_DEN = (
    1.0, 66.0, 1925.0, 32670.0, 357423.0, 2637558.0, 13339535.0,
    45995730.0, 105258076.0, 150917976.0, 120543840.0, 39916800.0, 0.0,
)

_EULER_GAMMA = 0.577215664901532860606512090082
# zeta(2), zeta(3), ..., zeta(30)
_ZETA = (
    1.644934066848226436472, 1.2020569031595942854, 1.082323233711138191516,
    1.036927755143369926331, 1.017343061984449139715, 1.00834927738192282684,
    1.004077356197944339379, 1.002008392826082214418, 1.000994575127818085337,
    1.000494188604119464559, 1.000246086553308048299, 1.000122713347578489147,
    1.000061248135058704829, 1.000030588236307020494, 1.000015282259408651872,
    1.000007637197637899762, 1.00000381729326499984, 1.000001908212716553939,
    1.000000953962033872796, 1.000000476932986787806, 1.000000238450502727733,
    1.000000119219925965311, 1.000000059608189051259, 1.000000029803503514652,
    1.000000014901554828365, 1.000000007450711789835, 1.000000003725334024788,
    1.000000001862659723513, 1.00000000093132743242,
)
_ROOT_WINDOW = 0.2


def _lanczos_sum_expg_scaled(x):
    num = 0.0
    den = 0.0
    for cn, cd in zip(_LANCZOS_NUM, _LANCZOS_DEN):
        num = num * x + cn
        den = den * x + cd
    return num / den


def _ln_gamma_near_one(eps):
    # ln Gamma(1 + eps) = -gamma*eps + sum_k (-1)^k zeta(k) eps^k / k
    terms = [-_EULER_GAMMA * eps]
    p = -eps
    for k, z in enumerate(_ZETA, start=2):
        p *= -eps
        terms.append(z * p / k)
    return math.fsum(terms)


def ln_gamma(x):
    """Natural log of the gamma function for real ``x > 0``."""
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"ln_gamma requires a finite x > 0, got {x!r}")
    if abs(x - 1.0) < _ROOT_WINDOW:
        return _ln_gamma_near_one(x - 1.0)
    if abs(x - 2.0) < _ROOT_WINDOW:
        return math.log1p(x - 2.0) + _ln_gamma_near_one(x - 2.0)
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - ln_gamma(1.0 - x)
    return (math.log(_lanczos_sum_expg_scaled(x))
            + (x - 0.5) * (math.log(x + _LANCZOS_G - 0.5) - 1.0))


_ln_gamma_ufunc = np.frompyfunc(ln_gamma, 1, 1)


def ln_gamma_array(x):
    return np.asarray(_ln_gamma_ufunc(np.asarray(x, dtype=float)), dtype=float)


def principal_power(z, nu):
    """``z**nu`` on the principal branch, Arg z in (-pi, pi]; ``0**0 = 1``."""
    z = np.asarray(z, dtype=complex)
    nu = np.asarray(nu, dtype=float)
    z, nu = np.broadcast_arrays(z, nu)
    arg = np.angle(z)
    arg = np.where(arg == -np.pi, np.pi, arg)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmod = np.log(np.abs(z))
        out = np.exp(nu * (logmod + 1j * arg))
    out = np.where(np.abs(z) == 0.0, np.where(nu == 0.0, 1.0 + 0j, 0j), out)
    return out


def i_power(alpha):
    """Principal ``i**alpha = exp(i*pi*alpha/2)``."""
    return np.exp(0.5j * np.pi * np.asarray(alpha, dtype=float))


@dataclass(frozen=True)
class SeriesInfo:
    terms: int
    tail: np.ndarray  # rigorous bound on the neglected part, same units as the value
    term_scale: np.ndarray  # sum of |terms|, a cancellation gauge


def bessel_j(nu, z, L=None, tol=1e-15, full_output=False):
    """Bessel function of the first kind J_nu(z), ``nu >= 0`` real, complex z.

    ``nu`` and ``z`` broadcast against each other.  With ``L`` given, exactly
    terms ``l = 0 .. L-1`` of the ascending series are summed and
    ``TailNotConverged`` is raised if the tail bound is above ``tol`` times
    the result; with ``L=None`` terms are added until the bound drops below
    that level.
    """
    nu = np.asarray(nu, dtype=float)
    z = np.asarray(z, dtype=complex)
    scalar = nu.ndim == 0 and z.ndim == 0
    if np.any(nu < 0) or not np.all(np.isfinite(nu)):
        raise DomainError("Bessel order must be finite and nonnegative")
    if not np.all(np.isfinite(z)):
        raise DomainError("Bessel argument must be finite")
    if np.any(np.abs(z) > STABILITY_RADIUS):
        raise DomainError(
            f"|z| = {np.max(np.abs(z)):.6g} exceeds the series stability "
            f"radius {STABILITY_RADIUS}")
    if L is not None and L < 1:
        raise DomainError("series cutoff L must be >= 1")
    nu, z = np.broadcast_arrays(nu, z)
    shape = z.shape

    half = z * 0.5  # exact
    xr, xi = half.real, half.imag
    p1h, p1l = sm.two_prod(xr, xr)
    p2h, p2l = sm.two_prod(xi, xi)
    p3h, p3l = sm.two_prod(xr, xi)
    wr = sm.dd_add(-p1h, -p1l, p2h, p2l)  # -(x^2 - y^2)
    wi = (-2.0 * p3h, -2.0 * p3l)  # -2xy
    w = (wr[0], wr[1], wi[0], wi[1])
    q = np.abs(half) ** 2

    one = np.ones(shape)
    zero = np.zeros(shape)
    term = (one, zero.copy(), zero.copy(), zero.copy())
    total = term
    term_scale = one.copy()
    limit = MAX_SERIES_TERMS if L is None else L
    l = 1
    while True:
        # first neglected term is l; bound the tail by a geometric series
        t_abs = sm.cdd_abs_upper(term)
        nxt = t_abs * q / (l * (l + nu))
        ratio = q / ((l + 1) * (l + 1 + nu))
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(ratio < 1.0, nxt / (1.0 - ratio), np.inf)
        tail = np.where(nxt == 0.0, 0.0, tail)
        s_abs = np.hypot(total[0] + total[1], total[2] + total[3])
        target = tol * np.maximum(s_abs, _DD_FLOOR * term_scale)
        converged = tail <= target
        if l >= limit or (L is None and np.all(converged)):
            break
        lh, ll = sm.two_sum(float(l), nu)
        dh, dl = sm.dd_mul(lh, ll, float(l), 0.0)
        term = sm.cdd_div_real(sm.cdd_mul(term, w), dh, dl)
        total = sm.cdd_add(total, term)
        term_scale = term_scale + sm.cdd_abs_upper(term)
        l += 1

    gam = np.exp(-ln_gamma_array(nu + 1.0))
    pref = principal_power(half, nu) * gam
    value = pref * sm.cdd_to_complex(total)
    apref = np.abs(pref)
    info = SeriesInfo(terms=l, tail=apref * tail, term_scale=apref * term_scale)
    if not np.all(converged):
        bad = ~converged
        raise TailNotConverged(
            f"Bessel series tail not converged after {l} terms "
            f"(max tail {np.max(info.tail[bad]):.3g})",
            achieved=float(np.max(info.tail[bad])))
    if scalar:
        value = complex(value)
        info = SeriesInfo(terms=l, tail=float(info.tail),
                          term_scale=float(info.term_scale))
    return (value, info) if full_output else value


def bessel_i(nu, z, L=None, tol=1e-15, full_output=False):
    """Modified Bessel function via ``I_nu(z) = i**(-nu) J_nu(i z)``."""
    nu_arr = np.asarray(nu, dtype=float)
    value, info = bessel_j(nu, 1j * np.asarray(z, dtype=complex), L=L, tol=tol,
                           full_output=True)
    value = i_power(-nu_arr) * value
    if np.ndim(value) == 0:
        value = complex(value)
    return (value, info) if full_output else value
