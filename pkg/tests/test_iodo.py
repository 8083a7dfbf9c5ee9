import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abshift.abkernel import PhysicsConfig
from abshift.errors import CutoffInsufficient, DomainError
from abshift.iodo import (A1Witness, OperatorIndex, a1_norm_estimate, a1_witness,
                          coeff_decay_certificate, lambda_bound, operator_apply_at_zero,
                          spiral_samples, step1_bound)
from abshift.superosc import IDENTITY, ZERO, EntireSeries, f_n_series

SQUARE = EntireSeries.polynomial((0, 0, 1))
ONE = EntireSeries.polynomial((1,))
CUBIC = EntireSeries.polynomial((0, 0, 0, 1))
EXP15 = EntireSeries.exponential(1.5, 30)


def test_operator_index_validation():
    OperatorIndex(3, 3)
    with pytest.raises(DomainError):
        OperatorIndex(2, 3)
    with pytest.raises(DomainError):
        OperatorIndex(2, -1)


def test_a1_norm_examples():
    assert a1_norm_estimate(ZERO, 1.0) == 0.0
    assert a1_norm_estimate(ONE, 0.7) == 1.0
    assert a1_norm_estimate(EXP15, 3.0, radius=4.0) == pytest.approx(1.0, abs=1e-15)
    w = a1_witness(EXP15, 3.0)
    assert isinstance(w, A1Witness) and w.sample_radius == 4.0


def test_spiral_samples_are_nested_and_bounded():
    small, big = spiral_samples(100, 3.0), spiral_samples(400, 3.0)
    assert np.array_equal(small, big[:100])
    assert np.max(np.abs(big)) <= 3.0 and big[0] == 0


@given(st.integers(10, 300), st.integers(1, 300))
@settings(max_examples=30, deadline=None)
def test_a1_estimate_grows_with_the_sample_set(k1, extra):
    f = EntireSeries.exponential(2.0 - 1.0j, 40)
    assert a1_norm_estimate(f, 1.0, k1) <= a1_norm_estimate(f, 1.0, k1 + extra)


def test_certificate_examples():
    assert coeff_decay_certificate(ONE) == (1.0, 0.25)
    C, b = coeff_decay_certificate(EXP15)
    assert (C, b) == (1.0, 2.0)
    C, b = coeff_decay_certificate(CUBIC)
    assert b == 0.25 and C == pytest.approx(6 / b ** 3)
    with pytest.raises(DomainError):
        coeff_decay_certificate(ZERO)
    # beyond the grid the rate doubles until it covers the declared decay
    assert coeff_decay_certificate(EntireSeries.exponential(11.0, 40))[1] == 16.0


@pytest.mark.parametrize("f", [ONE, CUBIC, EXP15, EntireSeries.exponential(-0.4 + 0.3j, 25)])
def test_certificate_holds_on_stored_coefficients(f):
    C, b = coeff_decay_certificate(f)
    for j, c in enumerate(f.coeffs):
        assert abs(c) <= C * b ** j / math.factorial(j) * (1 + 1e-12)


def test_operator_examples():
    f = EntireSeries.exponential(0.8, 12)
    assert operator_apply_at_zero(IDENTITY, SQUARE, OperatorIndex(0, 0), f) == f.coeffs[0]
    w = EntireSeries.polynomial((0, 2.5))
    assert operator_apply_at_zero(IDENTITY, ZERO, OperatorIndex(1, 0), w) == pytest.approx(2.5 / 1j)


def test_operator_on_exponentials_collapses_to_powers():
    a = 1.3
    f = EntireSeries.exponential(a, 20)
    for m in range(5):
        for l in range(m + 1):
            v = operator_apply_at_zero(IDENTITY, SQUARE, OperatorIndex(m, l), f)
            assert abs(v - a ** (m - l) * (a * a) ** l) < 1e-12


def test_operator_cutoff_failure():
    g = EntireSeries.exponential(1.0, 20)  # symbol with many terms
    with pytest.raises(CutoffInsufficient) as err:
        operator_apply_at_zero(g, ZERO, OperatorIndex(3, 0), EXP15, cutoff=2)
    assert err.value.achieved > 1e-12
    v, tail = operator_apply_at_zero(g, ZERO, OperatorIndex(3, 0), EXP15, cutoff=2,
                                     tol=math.inf, full_output=True)
    full = operator_apply_at_zero(g, ZERO, OperatorIndex(3, 0), EXP15, cutoff=19, tol=math.inf)
    assert abs(v - full) <= tail


@pytest.mark.parametrize("f", [ONE, CUBIC, EXP15])
def test_step1_estimate(f):
    C, b = coeff_decay_certificate(f)
    for m in range(7):
        for l in range(m + 1):
            idx = OperatorIndex(m, l)
            v = operator_apply_at_zero(IDENTITY, SQUARE, idx, f)
            assert abs(v) <= step1_bound(IDENTITY, SQUARE, idx, C, b) * (1 + 1e-12)


@given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.integers(0, 5), st.data())
@settings(max_examples=40, deadline=None)
def test_operator_is_linear(c, m, data):
    l = data.draw(st.integers(0, m))
    idx = OperatorIndex(m, l)
    f = EntireSeries.exponential(0.9, 20)
    base = operator_apply_at_zero(IDENTITY, SQUARE, idx, f)
    scaled = operator_apply_at_zero(IDENTITY, SQUARE, idx, f.scale(c))
    assert abs(scaled - c * base) <= 1e-13 * (1 + abs(c * base))


def test_lambda_examples():
    for M, hbar, t in [(1, 1, 1), (2.0, 0.5, 1.7), (0.3, 1.1, 0.25)]:
        cfg = PhysicsConfig(M=M, hbar=hbar, t=t)
        lam = lambda_bound(cfg, ZERO, ZERO, 1.0, 10)
        assert lam.value == pytest.approx(2 * hbar * t / M, rel=2e-16) and lam.tail == 0.0


@pytest.mark.parametrize("b", [0.25, 0.5, 1.0, 2.0])
def test_lambda_partial_sums_are_cauchy(b):
    cfg = PhysicsConfig()
    for M in (10, 20, 40, 60):
        lo = lambda_bound(cfg, IDENTITY, SQUARE, b, M)
        hi = lambda_bound(cfg, IDENTITY, SQUARE, b, 2 * M)
        assert 0 <= hi.value - lo.value <= lo.tail


def test_lambda_is_monotone_in_b():
    cfg = PhysicsConfig(t=0.7)
    vals = [lambda_bound(cfg, IDENTITY, SQUARE, b, 80).value for b in (0.25, 0.5, 1.0, 2.0)]
    assert all(x < y for x, y in zip(vals, vals[1:]))


def test_superoscillations_converge_in_a1():
    a = 1.3
    target = EntireSeries.exponential(a, 60)
    norms = [a1_norm_estimate(f_n_series(n, a, 60) - target, 2 * a) for n in (4, 8, 16, 24)]
    assert all(x > y for x, y in zip(norms, norms[1:]))
