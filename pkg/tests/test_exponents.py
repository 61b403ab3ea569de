import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from strichlab.exponents import (
    RangeError,
    Region,
    as_reciprocal,
    classify,
    csv_row,
    exponents,
    knapp_field_exponent,
    knapp_ratio_exponent,
    operator_exponent,
    q_admissible,
    sharp_line_q,
    wave_exponent,
)

INF = math.inf


def test_spec_examples():
    e = exponents(3, 2, 2)
    assert (e.s1, e.s2, e.s) == (F(-1, 2), F(0), F(-1))
    e = exponents(2, INF, INF)
    assert (e.s1, e.s2, e.s) == (F(1, 4), F(-1, 4), F(1))


def test_classify_examples():
    c = classify(2, 4, 3)
    assert c.region is Region.EXTENDED
    assert c.alpha_thm1 == F(3, 10) and c.alpha_thm2 == F(1, 4)
    assert classify(2, 4, 2).region is Region.NECESSITY_VIOLATED
    assert classify(3, F(10, 3), 2).region is Region.EXCLUDED_ENDPOINT
    assert classify(3, "10/3", 2).region is Region.EXCLUDED_ENDPOINT
    assert classify(2, INF, 2).region is Region.EXCLUDED_ENDPOINT


def test_sharp_line_examples():
    assert sharp_line_q(2, 6) == 2
    assert sharp_line_q(5, 2) == INF
    assert sharp_line_q(3, F(10, 3)) == 2
    assert not q_admissible(sharp_line_q(2, INF))


@pytest.mark.parametrize("p,q", [(1, 2), (2, 1.5), (0, 2), (-3, 4)])
def test_range_errors(p, q):
    with pytest.raises(RangeError):
        exponents(3, p, q)


def test_bad_dimension():
    with pytest.raises(RangeError):
        exponents(1, 2, 2)


def test_reciprocal_parsing():
    assert as_reciprocal("inf") == 0
    assert as_reciprocal(2.5) == F(2, 5)
    assert as_reciprocal(F(10, 3)) == F(3, 10)
    assert as_reciprocal(10 / 3) == F(3, 10)


inv_p = st.fractions(min_value=0, max_value=F(1, 2), max_denominator=60)
inv_q = st.fractions(min_value=0, max_value=F(1, 2), max_denominator=60)
dims = st.integers(min_value=2, max_value=9)


def _pq(ip, iq):
    return (INF if ip == 0 else 1 / ip), (INF if iq == 0 else 1 / iq)


@given(dims, inv_p, inv_q)
@settings(max_examples=300, deadline=None)
def test_exponent_identities(n, ip, iq):
    p, q = _pq(ip, iq)
    e = exponents(n, p, q)
    assert e.s1 + e.s2 == -iq
    assert e.s == n * (F(1, 2) - ip) - 2 * iq


@given(dims, inv_p)
@settings(max_examples=200, deadline=None)
def test_classical_line_has_zero_regularity(n, ip):
    iq = F(n, 2) * (F(1, 2) - ip)
    if iq > F(1, 2):
        return
    p, q = _pq(ip, iq)
    assert exponents(n, p, q).s == 0
    c = classify(n, p, q)
    if c.region is Region.CLASSICAL:
        assert c.alpha_thm1 == 0 and c.alpha_thm2 == 0


@given(dims, inv_p, inv_q)
@settings(max_examples=300, deadline=None)
def test_region_definitions(n, ip, iq):
    p, q = _pq(ip, iq)
    c = classify(n, p, q)
    endpoint = (n == 2 and ip == 0 and iq == F(1, 2)) or (ip == F(2 * n - 3, 2 * (2 * n - 1)) and iq == F(1, 2))
    if endpoint:
        assert c.region is Region.EXCLUDED_ENDPOINT
        return
    classical = 2 * iq + n * ip <= F(n, 2)
    violated = iq > F(2 * n - 1, 2) * (F(1, 2) - ip)
    assert (c.region is Region.CLASSICAL) == classical
    assert (c.region is Region.NECESSITY_VIOLATED) == violated
    if c.region is Region.EXTENDED:
        assert 0 < c.alpha_thm2 < c.alpha_thm1
    # the Knapp ratio exponent is positive exactly in the violated region
    assert (knapp_ratio_exponent(n, p, q) > 0) == violated


@given(dims, inv_p, inv_q, st.integers(min_value=2, max_value=7))
@settings(max_examples=150, deadline=None)
def test_classification_depends_only_on_reciprocals(n, ip, iq, m):
    p, q = _pq(ip, iq)
    as_strings = (str(p) if p != INF else "inf", str(q) if q != INF else "inf")
    scaled = (F(m * p.numerator, m * p.denominator) if p != INF else INF, q)
    assert classify(n, p, q) == classify(n, *as_strings) == classify(n, *scaled)


def test_scaling_exponents():
    assert knapp_field_exponent(2, 4, 4) == F(-3, 8)
    assert knapp_ratio_exponent(2, 4, 2) == F(1, 8)
    assert operator_exponent(2, INF, 4) == F(-1, 2)
    assert operator_exponent(2, 2, 2) == F(1, 2)
    assert wave_exponent(3, 2, INF) == 0
    assert wave_exponent(3, INF, INF) == -1
    assert wave_exponent(3, INF, 2) == F(-1, 2)


def test_sharp_line_ratio_exponent_vanishes():
    for n in (2, 3, 4):
        for p in (3, 4, 5, 8):
            q = sharp_line_q(n, p)
            if q_admissible(q):
                assert knapp_ratio_exponent(n, p, q) == 0


def test_csv_row():
    assert csv_row(3, 2, 2) == ["3", "2", "2", "-1/2", "0", "-1", "necessity-violated", "", "", ""]
    assert csv_row(3, 4, 2)[6:] == ["extended", "7/20", "5/16", "1/2"]
