import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abshift.abkernel import (PhysicsConfig, PolarPoint, WindingTruncation, f_xi, f_xi_bound,
                              f_xi_bound_majorant, kernel_K, winding_orders, winding_tail_bound)
from abshift.errors import DomainError, SingularTime, WindingTailNotConverged
from abshift.quadrature import ROTATION


def test_physics_config_split_and_validation():
    cfg = PhysicsConfig(xi=-1.25)
    assert cfg.xi_i == -2 and cfg.xi_f == pytest.approx(0.75)
    assert PhysicsConfig(xi=3.0).xi_f == 0.0
    with pytest.raises(SingularTime):
        PhysicsConfig(t=0.0)
    with pytest.raises(SingularTime):
        PhysicsConfig(t=-1.0)
    with pytest.raises(DomainError):
        PhysicsConfig(M=-1.0)
    assert PolarPoint(1.0, -0.5).phi == pytest.approx(2 * math.pi - 0.5)
    with pytest.raises(DomainError):
        PolarPoint(-1.0)


def test_winding_order_sequence():
    assert [n for n, _ in winding_orders(0.3, 2)] == [0, 1, -1, 2, -2]


def test_rho_zero_cases():
    for xi in (-2.0, 0.0, 1.0, 3.0):
        cfg = PhysicsConfig(xi=xi)
        assert f_xi(cfg, 0.8, 1.1, 0.4, 0.0) == pytest.approx(cmath.exp(1j * xi * 0.7), abs=1e-15)
    assert f_xi(PhysicsConfig(xi=0.37), 0.8, 1.1, 0.4, 0.0) == 0


def test_zero_flux_generating_function():
    cfg = PhysicsConfig(xi=0.0)
    rho = np.linspace(0.1, 4.0, 16)[:, None]
    alpha = np.linspace(0.0, 2 * math.pi, 16, endpoint=False)[None, :]
    got = f_xi(cfg, 1.0, alpha, 0.0, rho)
    ref = np.exp(-1j * cfg.bessel_scale(1.0) * rho * np.cos(alpha))
    assert np.max(np.abs(got - ref) / np.abs(ref)) < 1e-12


def test_bound_examples():
    assert f_xi_bound(PhysicsConfig(xi=0.37), 1.0, 0.0) == 0.0
    assert f_xi_bound(PhysicsConfig(xi=0.0), 1.0, 0.0) == 3.0
    cfg = PhysicsConfig(xi=0.37)
    for rho in (0.5, 1.0, 2.0, 4.0):
        bound = f_xi_bound(cfg, 1.0, rho)
        for theta in np.linspace(0, 2 * math.pi, 32, endpoint=False):
            assert abs(f_xi(cfg, 1.0, 0.0, theta, rho)) < bound
            assert abs(f_xi(cfg, 1.0, 0.0, theta, rho * ROTATION)) < bound


@given(st.floats(0, 2), st.floats(0, 4), st.floats(0, 2 * math.pi), st.floats(0.5, 2),
       st.floats(-2, 2), st.booleans())
@settings(max_examples=150, deadline=None)
def test_bound_dominates_winding_sum(r, rho, theta, t, xi, rotated):
    cfg = PhysicsConfig(t=t, xi=xi)
    z = rho * ROTATION if rotated else rho
    assert abs(f_xi(cfg, r, 0.3, theta, z)) <= f_xi_bound(cfg, r, rho) * (1 + 1e-12) + 1e-300


def test_bound_majorant_dominates_bound():
    for r in (0.0, 0.3, 1.0, 2.0):
        for t in (0.5, 1.0, 2.0):
            cfg = PhysicsConfig(t=t, xi=0.37)
            A, p, c = f_xi_bound_majorant(cfg, r)
            u = np.linspace(0, 15, 301)
            assert np.all(f_xi_bound(cfg, r, u) <= A * (1 + u) ** p * np.exp(c * u))


def test_depends_only_on_angle_difference():
    cfg = PhysicsConfig(xi=0.61)
    trunc = WindingTruncation(N=25)
    a = f_xi(cfg, 0.9, 0.4, 1.3, 2.2 * ROTATION, trunc)
    b = f_xi(cfg, 0.9, 0.4 + 2.0, 1.3 + 2.0, 2.2 * ROTATION, trunc)
    assert a == pytest.approx(b, abs=1e-14)


def test_doubling_the_cutoff_stays_inside_the_tail_estimate():
    cfg = PhysicsConfig(xi=0.37)
    v, info = f_xi(cfg, 1.0, 0.2, 1.0, 3.0, WindingTruncation(tail_tol=1e-9), full_output=True)
    v2 = f_xi(cfg, 1.0, 0.2, 1.0, 3.0, WindingTruncation(N=2 * info.N, tail_tol=1.0))
    assert abs(v - v2) <= info.tail + 1e-15


def test_flux_shift_changes_only_a_phase():
    for rho in (0.7, 2.0 * ROTATION):
        a = f_xi(PhysicsConfig(xi=0.37), 0.8, 0.9, 0.1, rho)
        b = f_xi(PhysicsConfig(xi=1.37), 0.8, 0.9, 0.1, rho)
        assert abs(b) == pytest.approx(abs(a), rel=1e-12)
        assert b == pytest.approx(a * cmath.exp(0.8j), abs=1e-12)


def test_winding_tail_failure_reports_estimate():
    with pytest.raises(WindingTailNotConverged) as err:
        f_xi(PhysicsConfig(xi=0.37), 1.0, 0.0, 0.0, 20.0, WindingTruncation(N=3))
    assert err.value.achieved > 1e-14


def test_kernel_examples():
    cfg = PhysicsConfig(M=1.3, hbar=0.9, t=0.8, xi=0.37)
    tgt, src = PolarPoint(0.6, 0.2), PolarPoint(1.4, 2.5)
    K = kernel_K(cfg, tgt, src)
    F = f_xi(cfg, 0.6, 0.2, 2.5, 1.4)
    assert abs(K) == pytest.approx(cfg.prefactor() * abs(F), rel=1e-14)
    shifted = kernel_K(cfg, PolarPoint(0.6, 1.2), PolarPoint(1.4, 3.5))
    assert shifted == pytest.approx(K, abs=1e-14)

    free = PhysicsConfig(xi=0.0)
    r, rho, alpha = 0.6, 1.4, 0.2 - 2.5
    K0 = kernel_K(free, tgt, src)
    closed = free.prefactor() * cmath.exp(1j * (r * r + rho * rho - 2 * r * rho * math.cos(alpha)) / 2)
    assert K0 == pytest.approx(closed, abs=1e-13)


def test_tail_bound_at_subnormal_argument():
    # |z|/2 underflows to zero here
    assert winding_tail_bound(0.0, 1, 5e-324, 0.0) == 0.0
    assert abs(f_xi(PhysicsConfig(), 1.0, 0.3, 0.0, 5e-324)) <= 1.0 + 1e-12
