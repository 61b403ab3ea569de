import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from strichlab import bessel
from strichlab.bessel import Regime


def test_oracle_point_values():
    assert bessel.j_oracle(0, 0) == 1.0
    assert bessel.j_oracle(2.5, 0) == 0.0
    assert bessel.j_oracle(0.5, math.pi / 2) == pytest.approx(2 / math.pi, abs=1e-13)


def test_recurrence_self_check():
    nu, r = 5.5, 20.0
    a, b, c = (bessel.j_oracle(v, r) for v in (nu - 1, nu, nu + 1))
    assert abs(a + c - 2 * nu / r * b) < 1e-10


@pytest.mark.parametrize("nu", [0.5, 1.5])
def test_half_integer_closed_forms(nu):
    r = np.geomspace(0.1, 100, 200)
    s = np.sqrt(2 / (np.pi * r))
    exact = s * np.sin(r) if nu == 0.5 else s * (np.sin(r) / r - np.cos(r))
    got = bessel.j_oracle_array(nu, r)
    assert np.max(np.abs(got - exact) / np.abs(exact)) < 1e-10


# jv flushes to zero for subnormal arguments, so the comparison stops at 1e-300
@given(st.floats(min_value=0, max_value=60), st.one_of(st.just(0.0), st.floats(min_value=1e-300, max_value=300)))
@settings(max_examples=80, deadline=None)
def test_oracle_agrees_with_library(nu, r):
    assert abs(bessel.j_oracle(nu, r) - special.jv(nu, r)) < 1e-11


@pytest.mark.parametrize("r", [5e-324, 1.1e-308, 1e-200])
@pytest.mark.parametrize("nu", [0.0, 0.03125, 0.5])
def test_oracle_tiny_argument_leading_term(nu, r):
    lead = math.exp(nu * math.log(r / 2) - math.lgamma(nu + 1)) if r / 2 > 0 else float(nu == 0)
    assert bessel.j_oracle(nu, r) == pytest.approx(lead, rel=1e-12, abs=1e-300)


def test_oracle_domain():
    with pytest.raises(ValueError):
        bessel.j_oracle(-1, 2)
    with pytest.raises(ValueError):
        bessel.j_oracle(1, -2)


def test_adaptive_quadrature_depth_cap():
    with pytest.raises(bessel.ConvergenceError):
        bessel.adaptive_gl(lambda x: np.sin(1e9 * x**2), 0.0, 1.0, 1, 1e-15)


def test_orders_from_dimension():
    assert bessel.nu_of(2, 0) == 0
    assert bessel.nu_of(3, 0) == 0.5
    for n in range(2, 7):
        for k in range(6):
            nu = bessel.nu_of(n, k)
            assert nu == 0 or nu >= 0.5


def test_regime_boundaries():
    nu = 10.5
    edge = bessel.oscillatory_threshold(nu)
    assert bessel.regime(nu, edge) is Regime.OSCILLATORY
    assert bessel.regime(nu, edge * (1 - 1e-12)) is Regime.TRANSITION
    assert bessel.regime(nu, nu / 2 * (1 - 1e-12)) is Regime.SMALL_ARG
    assert bessel.regime(nu, nu / 2) is Regime.TRANSITION
    assert bessel.regime(0.0, 1.0) is Regime.SMALL_ARG
    assert bessel.regime(0.0, 4.0) is Regime.OSCILLATORY


def test_theta_phase_examples():
    r = np.linspace(0.5, 50, 20)
    assert np.allclose(bessel.theta_phase(0.0, r), r, rtol=0, atol=1e-13)
    assert bessel.theta_phase(1.0, 2.0) == pytest.approx(2 * (math.sqrt(0.75) - 0.5 * (math.pi / 2 - math.pi / 3)))
    big = 1e5
    assert abs(bessel.theta_phase(3.0, big) - big + 3 * 9 / (2 * big)) < 1e-6
    with pytest.raises(ValueError):
        bessel.theta_phase(2.0, 2.0)


def test_main_part_matches_half_order():
    r = np.linspace(4, 400, 2000)
    resid = r * np.abs(bessel.asymptotic_main(0.5, r) - np.sqrt(2 / (np.pi * r)) * np.sin(r))
    assert resid.max() < 1.0


def test_main_part_domain():
    with pytest.raises(ValueError):
        bessel.asymptotic_main(0.25, 100.0)
    with pytest.raises(ValueError):
        bessel.asymptotic_main(2.5, 4.0)


def test_main_part_peaks_are_pi_apart():
    r = np.linspace(200, 240, 400001)
    m = bessel.asymptotic_main(0.5, r)
    peaks = r[1:-1][(m[1:-1] > m[:-2]) & (m[1:-1] > m[2:])]
    assert np.allclose(np.diff(peaks), 2 * math.pi, atol=1e-3)
    troughs = r[1:-1][(m[1:-1] < m[:-2]) & (m[1:-1] < m[2:])]
    assert abs(abs(troughs[0] - peaks[0]) - math.pi) < 1e-2


def test_residual_at_threshold_against_oracle():
    nu = 2.5
    r = bessel.oscillatory_threshold(nu)
    assert r * abs(bessel.j_oracle(nu, r) - bessel.asymptotic_main(nu, r)) <= 10


@pytest.mark.parametrize("nu", [0.5, 2.5, 5.5, 10.5])
def test_residual_audit_saturates(nu):
    lo = bessel.oscillatory_threshold(nu) if nu > 0.5 else 4.0
    a = bessel.residual_audit(nu, np.arange(lo, 2048, 0.25), bessel.j_fast)
    b = bessel.residual_audit(nu, np.arange(lo, 4096, 0.25), bessel.j_fast)
    assert a <= 10
    assert b <= a * 1.05


def test_printed_coefficients_miss_the_amplitude():
    nu = 2.5
    r = np.arange(bessel.oscillatory_threshold(nu), 4096, 0.5)
    printed = bessel.residual_audit(nu, r, bessel.j_fast, "printed")
    hankel = bessel.residual_audit(nu, r, bessel.j_fast, "hankel")
    assert printed > 10 * hankel
    # the residual of the half-amplitude pair grows like r^(1/2)
    r2 = np.arange(bessel.oscillatory_threshold(nu), 16384, 0.5)
    assert bessel.residual_audit(nu, r2, bessel.j_fast, "printed") > 1.8 * printed


def test_residual_table_columns():
    r, J, main, res = bessel.residual_table(2.5, [20.0, 30.0])
    assert np.allclose(res, r * np.abs(J - main))


def test_decay_audit():
    c_half = bessel.decay_audit(0.5)
    c_quarter = bessel.decay_audit(0.25)
    assert c_half > 0.3
    assert c_quarter > c_half
    assert abs(bessel.j_oracle(10, 5)) < 1e-2
    with pytest.raises(ValueError):
        bessel.decay_audit(0.75)


def test_square_function_examples():
    assert bessel.square_function_integral(0.5, 4096) == pytest.approx(math.log(2) / math.pi, abs=1e-3)
    assert bessel.square_function_integral(40, 1) < 1e-6


def test_square_function_matches_closed_form_half_order():
    R = 37.0
    # |J_{1/2}|^2 = 2 sin^2 r / (pi r); integrate against the exact antiderivative pieces
    exact = (math.log(2) - (special.sici(4 * R)[1] - special.sici(2 * R)[1])) / math.pi
    assert bessel.square_function_integral(0.5, R) == pytest.approx(exact, abs=1e-12)


@pytest.mark.parametrize("nu,target,tol", [(0.5, 1.0, 0.01), (5.0, 0.1, 0.005), (2.5, 0.2, 0.002)])
def test_normalization_integral(nu, target, tol):
    assert abs(bessel.normalization_integral(nu, 1e4) - target) < tol


def test_normalization_monotone_in_cutoff():
    vals = [bessel.normalization_integral(2.5, rm) for rm in (250, 500, 1000, 2000)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_sqrt_r_bound():
    for nu in (0.5, 3.0, 12.5, 30.0):
        r = np.linspace(2 * nu, 3000, 30000)
        assert np.max(np.sqrt(r) * np.abs(bessel.j_fast(nu, r))) <= 1.0
