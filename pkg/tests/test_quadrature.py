import math

import numpy as np
import pytest

from abshift.abkernel import PhysicsConfig, PolarPoint
from abshift.errors import DomainError, QuadratureTailError
from abshift.quadrature import (PolyExpMajorant, QuadratureSpec, choose_u_max,
                                gauss_weighted_integral, periodic_integral, psi_direct)


def moment(n, gamma):
    return math.gamma((n + 1) / 2) / (2 * gamma ** ((n + 1) / 2))


def test_gauss_weighted_examples():
    one = gauss_weighted_integral(lambda u: np.ones_like(u), 1.0, majorant=PolyExpMajorant(1.0))
    assert one.value == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
    lin = gauss_weighted_integral(lambda u: u, 1.0, majorant=PolyExpMajorant(1.0, 1.0))
    assert lin.value == pytest.approx(0.5, rel=1e-14)
    cube = gauss_weighted_integral(lambda u: u ** 3, 2.0, majorant=PolyExpMajorant(1.0, 3.0))
    assert cube.value == pytest.approx(1 / 8, rel=1e-14)
    assert cube.error >= 0 and cube.tail_bounds["radial_tail"] <= 1e-10


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_gaussian_moments(gamma):
    for n in range(13):
        v = gauss_weighted_integral(lambda u, n=n: u ** n, gamma,
                                    majorant=PolyExpMajorant(1.0, float(n)))
        assert abs(v.value - moment(n, gamma)) <= 1e-12 * moment(n, gamma)


def test_tail_check():
    with pytest.raises(QuadratureTailError):
        gauss_weighted_integral(lambda u: u, 1.0, QuadratureSpec(u_max=2.0),
                                majorant=PolyExpMajorant(1.0, 1.0))
    with pytest.raises(DomainError):
        gauss_weighted_integral(lambda u: u, 1.0)
    U = choose_u_max(0.5, PolyExpMajorant(3.0, 2.0, 1.0), 1e-10)
    assert PolyExpMajorant(3.0, 2.0, 1.0).tail_bound(U, 0.5) < 1e-10


def test_periodic_examples():
    assert periodic_integral(lambda th: np.cos(th) ** 2, 16) == pytest.approx(math.pi, rel=1e-15)
    for k in (1, 3, 7):
        assert abs(periodic_integral(lambda th, k=k: np.exp(1j * k * th), 16)) < 1e-14
    quart = periodic_integral(lambda th: np.cos(th) ** 2 * np.sin(th) ** 2, 16)
    assert quart == pytest.approx(math.pi / 4, rel=1e-15)


def test_trapezoid_exact_on_trig_polynomials():
    rng = np.random.default_rng(0)
    n = 32
    c = rng.normal(size=n // 2) + 1j * rng.normal(size=n // 2)

    def f(th):
        return sum(c[k] * np.exp(1j * k * th) for k in range(n // 2))

    assert periodic_integral(f, n) == pytest.approx(2 * math.pi * c[0], abs=1e-13)


def test_quadrature_settings_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(n_theta=7)
    with pytest.raises(DomainError):
        QuadratureSpec(u_max=-1.0)


def test_psi_direct_free_origin():
    v = psi_direct(PhysicsConfig(xi=0.0), 0.0, 0.0, PolarPoint(0.0))
    assert v.value == pytest.approx(1j, abs=1e-12)
    assert v.error < 1e-10


def test_psi_direct_node_doubling():
    cfg = PhysicsConfig(xi=0.37)
    tgt = PolarPoint(0.7, 0.3)
    spec = QuadratureSpec()
    base = psi_direct(cfg, 1.2, 0.5, tgt, spec=spec)
    fine = psi_direct(cfg, 1.2, 0.5, tgt, spec=spec.refined())
    assert abs(base.value - fine.value) < 10 * spec.tol
    assert abs(base.value - fine.value) <= base.error
    assert set(base.tail_bounds) >= {"u_max", "radial_tail", "radial_doubling",
                                     "angular_halving", "winding"}
