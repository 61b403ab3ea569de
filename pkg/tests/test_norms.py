import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strichlab.dispersion import PowerLaw
from strichlab.exponents import RangeError
from strichlab.norms import RadialAccumulator, data_norm, full_space_norm, lp_norm, mixed_norm, radial_norms
from strichlab.propagator import RadialProfile, SpaceTimeField, SpaceTimeGrid

EXPONENTS = [1, 1.5, 2, 4, math.inf]


def field_from(vals, n=2, t=None, r=None):
    vals = np.asarray(vals, dtype=complex)
    t = np.linspace(0, 1, vals.shape[0]) if t is None else t
    r = np.linspace(0, 2, vals.shape[1]) if r is None else r
    return SpaceTimeField(SpaceTimeGrid(t, r, n), vals)


def test_constant_field():
    f = field_from(np.ones((11, 21)))
    assert mixed_norm(f, 2, 2) == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert mixed_norm(f, math.inf, math.inf) == 1.0
    g = field_from(np.ones((5, 11)), r=np.linspace(0, 1, 11))
    assert mixed_norm(g, 2, 2) == pytest.approx(math.sqrt(0.5), rel=1e-12)


@pytest.mark.parametrize("p", EXPONENTS)
@pytest.mark.parametrize("q", EXPONENTS)
def test_separable_field_factorizes(p, q):
    t = np.linspace(-1, 2, 31)
    r = np.linspace(0, 3, 41)
    a = np.exp(-t**2) + 0.1
    b = np.cos(r) + 1j
    f = field_from(np.outer(a, b), n=3, t=t, r=r)
    g = f.grid
    expected = lp_norm(a, g.t_weights, q) * lp_norm(b, g.r_weights * r**2, p)
    assert mixed_norm(f, p, q) == pytest.approx(expected, rel=1e-12)


def test_p_equals_q_is_plain_space_time_norm():
    rng = np.random.default_rng(0)
    vals = rng.normal(size=(9, 13)) + 1j * rng.normal(size=(9, 13))
    f = field_from(vals)
    g = f.grid
    w = np.outer(g.t_weights, g.r_weights * g.r)
    for p in (1, 2, 3.5):
        assert mixed_norm(f, p, p) == pytest.approx(np.sum(w * np.abs(vals) ** p) ** (1 / p), rel=1e-12)


arrays = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=48, max_size=48).map(
    lambda x: np.array(x).reshape(6, 8)
)


@settings(max_examples=60, deadline=None)
@given(arrays, arrays, st.sampled_from(EXPONENTS), st.sampled_from(EXPONENTS), st.floats(-5, 5))
def test_norm_axioms(a, b, p, q, c):
    fa, fb = field_from(a), field_from(b)
    na, nb = mixed_norm(fa, p, q), mixed_norm(fb, p, q)
    assert mixed_norm(field_from(c * a), p, q) == pytest.approx(abs(c) * na, rel=1e-9, abs=1e-9)
    assert mixed_norm(field_from(a + b), p, q) <= (na + nb) * (1 + 1e-9) + 1e-9


@settings(max_examples=60, deadline=None)
@given(arrays.map(lambda x: x[0]), st.sampled_from([1, 1.5, 2, 3]), st.sampled_from([2, 4, 6, math.inf]))
def test_holder_nesting(v, p, s):
    w = np.linspace(0.1, 0.4, v.size)
    if s <= p:
        return
    mu = w.sum()
    inv_s = 0 if math.isinf(s) else 1 / s
    assert lp_norm(v, w, p) <= mu ** (1 / p - inv_s) * lp_norm(v, w, s) * (1 + 1e-9) + 1e-12


def test_exponent_below_one_rejected():
    with pytest.raises(RangeError):
        lp_norm([1.0], [1.0], 0.5)


def test_full_space_norm_with_zonal_factor():
    f = field_from(np.ones((5, 9)), n=3)
    f0 = SpaceTimeField(f.grid, f.values, k=0)
    assert full_space_norm(f0, 2, 2) == pytest.approx(mixed_norm(f, 2, 2), rel=1e-9)
    assert full_space_norm(f, math.inf, 2, k=1) == pytest.approx(
        math.sqrt(3 / (4 * math.pi)) * mixed_norm(f, math.inf, 2), rel=1e-9
    )
    with pytest.raises(ValueError):
        full_space_norm(f, 2, 2)


def test_accumulator_matches_direct_norms():
    rng = np.random.default_rng(5)
    vals = rng.normal(size=(7, 50)) + 1j * rng.normal(size=(7, 50))
    f = field_from(vals, n=3)
    g = f.grid
    acc = RadialAccumulator(3, g.r, g.r_weights, [2, 4, math.inf], 7)
    for block in (slice(0, 13), slice(13, 40), slice(40, 50)):
        acc(vals[:, block], block)
    for p in (2, 4, math.inf):
        assert np.allclose(acc.radial_norms(p), radial_norms(f, p), rtol=1e-12)
        assert acc.mixed_norm(p, 3, g.t_weights) == pytest.approx(mixed_norm(f, p, 3), rel=1e-12)


def test_data_norm_examples():
    h = RadialProfile.from_function(lambda r: np.ones_like(r, dtype=complex), 200)
    base = math.sqrt((2.0**2 - 0.5**2) / 2)
    assert data_norm(h, 2, 0, 0.0, 0.0) == pytest.approx(base, rel=1e-10)
    assert data_norm(h, 3, 2, 0.0, 1.0) == pytest.approx(math.sqrt(7) * math.sqrt((8 - 0.125) / 3), rel=1e-10)
    # omega'/rho = 2 for rho^2
    assert data_norm(h, 2, 0, 0.0, 0.0, PowerLaw(2.0), s1=1.0) == pytest.approx(2 * base, rel=1e-10)
    assert data_norm(h, 2, 0, 0.5, 0.0) == pytest.approx(math.sqrt((8 - 0.125) / 3), rel=1e-10)


def test_data_norm_rejects_large_s():
    h = RadialProfile.from_function(lambda r: np.ones_like(r, dtype=complex), 32)
    with pytest.raises(RangeError):
        data_norm(h, 2, 0, 1.0, 0.0)
