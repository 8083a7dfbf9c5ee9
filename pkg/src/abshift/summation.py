"""Error-free transforms, double-double arithmetic and compensated sums.

Everything here works elementwise on numpy arrays (scalars broadcast), so
the same code serves scalar calls and vectorized grids.  A double-double
number is a pair ``(hi, lo)`` with ``|lo| <= ulp(hi)/2``; a complex
double-double is the 4-tuple ``(re_hi, re_lo, im_hi, im_lo)``.
"""

import math

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    return s, b - (s - a)


def split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return quick_two_sum(p, e)


def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = dd_mul(q1, 0.0 * q1, bh, bl)
    rh, rl = dd_add(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = dd_mul(q2, 0.0 * q2, bh, bl)
    rh, rl = dd_add(rh, rl, -ph, -pl)
    q3 = rh / bh
    q1, q2 = quick_two_sum(q1, q2)
    return dd_add(q1, q2, q3, 0.0 * q3)


def cdd_from_complex(z):
    z = np.asarray(z, dtype=complex)
    zero = np.zeros(z.shape)
    return z.real.copy(), zero, z.imag.copy(), zero.copy()


def cdd_add(x, y):
    rh, rl = dd_add(x[0], x[1], y[0], y[1])
    ih, il = dd_add(x[2], x[3], y[2], y[3])
    return rh, rl, ih, il


def cdd_mul(x, y):
    # (a + ib)(c + id) = (ac - bd) + i(ad + bc)
    ach, acl = dd_mul(x[0], x[1], y[0], y[1])
    bdh, bdl = dd_mul(x[2], x[3], y[2], y[3])
    adh, adl = dd_mul(x[0], x[1], y[2], y[3])
    bch, bcl = dd_mul(x[2], x[3], y[0], y[1])
    rh, rl = dd_add(ach, acl, -bdh, -bdl)
    ih, il = dd_add(adh, adl, bch, bcl)
    return rh, rl, ih, il


def cdd_div_real(x, dh, dl):
    rh, rl = dd_div(x[0], x[1], dh, dl)
    ih, il = dd_div(x[2], x[3], dh, dl)
    return rh, rl, ih, il


def cdd_to_complex(x):
    return (x[0] + x[1]) + 1j * (x[2] + x[3])


def cdd_abs_upper(x):
    return np.hypot(x[0], x[2]) + np.abs(x[1]) + np.abs(x[3])


def csum(terms):
    """Correctly rounded sum of complex terms (real and imaginary parts
    accumulated separately with ``math.fsum``)."""
    terms = list(terms)
    return complex(math.fsum(z.real for z in terms),
                   math.fsum(z.imag for z in terms))


class CompensatedSum:
    """Running Neumaier sum over complex numpy arrays of a fixed shape.

    Terms are added one at a time in caller-determined order, so the result
    is bit-reproducible for a fixed sequence of inputs.
    """

    def __init__(self, shape=()):
        self._re = np.zeros(shape)
        self._im = np.zeros(shape)
        self._cre = np.zeros(shape)
        self._cim = np.zeros(shape)
        self.abs_total = np.zeros(shape)

    def add(self, term):
        term = np.asarray(term, dtype=complex)
        self._re, e = two_sum(self._re, term.real)
        self._cre = self._cre + e
        self._im, e = two_sum(self._im, term.imag)
        self._cim = self._cim + e
        self.abs_total = self.abs_total + np.abs(term)

    @property
    def value(self):
        return (self._re + self._cre) + 1j * (self._im + self._cim)
