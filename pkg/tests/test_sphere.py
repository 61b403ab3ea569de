import math

import numpy as np
import pytest

from strichlab.sphere import (
    _theta_integral,
    angular_weight,
    gegenbauer_eval,
    harmonic_dimension,
    sphere_area,
    zonal_harmonic,
    zonal_lp_norm,
)


def test_gegenbauer_examples():
    t = np.linspace(-1, 1, 9)
    assert np.all(gegenbauer_eval(4, 0, t) == 1)
    assert np.allclose(gegenbauer_eval(3, 1, t), t)
    assert gegenbauer_eval(3, 2, 1.0) == pytest.approx(1.0)
    # Chebyshev convention in the plane
    assert np.allclose(gegenbauer_eval(2, 5, np.cos(t)), np.cos(5 * t))


def test_harmonic_dimension_examples():
    assert harmonic_dimension(3, 2) == 5
    assert all(harmonic_dimension(2, k) == 2 for k in range(1, 10))
    assert all(harmonic_dimension(n, 0) == 1 for n in range(2, 8))
    assert harmonic_dimension(4, 3) == 16


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("k", range(9))
def test_unit_l2_norm(n, k):
    assert zonal_lp_norm(n, k, 2) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_orthogonality(n):
    nodes = 64
    for k in range(9):
        for j in range(k):
            f = lambda th, j=j, k=k: zonal_harmonic(n, j, th) * zonal_harmonic(n, k, th)
            assert abs(_theta_integral(f, n, k, nodes)) < 1e-8


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("p", [1, 3, 4.5, math.inf])
def test_constant_harmonic_norms(n, p):
    expected = sphere_area(n) ** ((0 if math.isinf(p) else 1 / p) - 0.5)
    assert zonal_lp_norm(n, 0, p) == pytest.approx(expected, rel=1e-9)


def test_sup_norm_three_dimensions():
    assert zonal_lp_norm(3, 1, math.inf) == pytest.approx(math.sqrt(3 / (4 * math.pi)), rel=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sup_norm_from_addition_theorem(n):
    for k in range(12):
        expected = math.sqrt(harmonic_dimension(n, k) / sphere_area(n))
        assert zonal_lp_norm(n, k, math.inf) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sup_norm_nondecreasing(n):
    vals = [zonal_lp_norm(n, k, math.inf) for k in range(17)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("n", [3, 4])
def test_lp_norms_increase_with_p(n):
    # Holder on a finite measure space, after normalizing the measure
    area = sphere_area(n)
    ps = [1, 2, 3, 6, math.inf]
    for k in (1, 3, 6):
        vals = [zonal_lp_norm(n, k, p) * area ** (-(0 if math.isinf(p) else 1 / p)) for p in ps]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("k", [1, 2, 5])
def test_laplace_beltrami_eigenvalue(n, k):
    h = 1e-4
    th = np.linspace(0.3, math.pi - 0.3, 41)
    y = lambda x: zonal_harmonic(n, k, x)
    d1 = (y(th + h) - y(th - h)) / (2 * h)
    d2 = (y(th + h) - 2 * y(th) + y(th - h)) / h**2
    lap = d2 + (n - 2) * np.cos(th) / np.sin(th) * d1
    vals = y(th)
    mask = np.abs(vals) > 0.05 * np.max(np.abs(vals))
    rel = np.abs(-lap[mask] - k * (k + n - 2) * vals[mask]) / (k * (k + n - 2) * np.abs(vals[mask]))
    assert rel.max() < 1e-4


def test_angular_weight():
    assert angular_weight(3, 2, 1) == pytest.approx(math.sqrt(7))
    assert angular_weight(4, 2, 1) == pytest.approx(3.0)
    assert angular_weight(5, 0, 7.3) == 1.0
