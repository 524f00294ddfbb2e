import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from henonlab.dynamics import DomainError
from henonlab.horseshoe import (
    Interval,
    boundary_scan,
    certificate_from_text,
    certificate_to_text,
    certify_horseshoe,
    certify_horseshoe_1d,
    entropy_census,
    find_tangency,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@st.composite
def intervals(draw):
    a = draw(finite)
    b = draw(finite)
    lo, hi = min(a, b), max(a, b)
    return Interval(lo, hi)


@st.composite
def interval_with_member(draw):
    iv = draw(intervals())
    t = draw(st.floats(min_value=0.0, max_value=1.0))
    x = iv.lo + t * (iv.hi - iv.lo)
    return iv, min(max(x, iv.lo), iv.hi)


@given(interval_with_member(), interval_with_member())
@settings(max_examples=300, deadline=None)
def test_interval_arithmetic_sound(am, bm):
    I, x = am
    J, y = bm
    s = I + J
    assert s.lo <= x + y <= s.hi
    d = I - J
    assert d.lo <= x - y <= d.hi
    p = I * J
    assert p.lo <= x * y <= p.hi
    q = I.square()
    assert q.lo <= x * x <= q.hi
    a = I.abs()
    assert a.lo <= abs(x) <= a.hi


@given(interval_with_member())
@settings(max_examples=200, deadline=None)
def test_interval_sqrt_sound(am):
    I, x = am
    if I.lo < 0:
        return
    r = I.sqrt()
    assert r.lo <= math.sqrt(x) <= r.hi


def test_interval_empty_rejected():
    with pytest.raises(DomainError):
        Interval(1.0, 0.0)


def test_certify_reference_parameters():
    assert certify_horseshoe(10.0, 0.3).verified
    assert certify_horseshoe(6.0, 0.3).verified
    cert = certify_horseshoe(1.0, 0.3)
    assert not cert.verified
    assert cert.failure


def test_certify_rejects_b_zero():
    with pytest.raises(DomainError):
        certify_horseshoe(5.0, 0.0)


def test_certificate_soundness_hook():
    # whenever the certificate verifies, the census must report 2^n both
    # over R and C for n <= 6 (cross-validation of the two subsystems)
    for (a, b) in [(10.0, 0.3), (6.0, 0.3)]:
        assert certify_horseshoe(a, b).verified
        rep = entropy_census(a, b, 6)
        for row in rep.rows:
            assert row.complex_count == row.expected
            assert row.real_count == row.expected
        assert rep.consistent_with_maximal_entropy


def test_census_monotone_and_entropy_inequality():
    for (a, b) in [(10.0, 0.3), (1.0, 0.3), (2.0, -0.5)]:
        rep = entropy_census(a, b, 6)
        for row in rep.rows:
            assert row.real_count <= row.complex_count
            if row.real_count:
                assert row.growth_rate <= math.log(2) + 1e-9


def test_census_a1_inconsistent():
    rep = entropy_census(1.0, 0.3, 6)
    assert not rep.consistent_with_maximal_entropy
    assert any(r.complex_count > r.real_count for r in rep.rows)


def test_census_growth_estimate_at_horseshoe():
    rep = entropy_census(10.0, 0.3, 6)
    rate = rep.rows[-1].growth_rate
    assert 0.6 <= rate <= math.log(2) + 1e-9


def test_census_guard():
    with pytest.raises(DomainError):
        entropy_census(6.0, 0.3, 11)


def test_certify_1d_examples():
    assert certify_horseshoe_1d(2.5).verified
    assert not certify_horseshoe_1d(1.9).verified


def test_1d_locus_boundary_within_5_percent():
    # bisect the verified predicate: the transition must land within 0.05
    # of the true boundary a = 2
    lo, hi = 1.5, 4.0
    assert not certify_horseshoe_1d(lo).verified
    assert certify_horseshoe_1d(hi).verified
    for _ in range(24):
        mid = 0.5 * (lo + hi)
        if certify_horseshoe_1d(mid).verified:
            hi = mid
        else:
            lo = mid
    assert abs(hi - 2.0) < 0.05
    assert lo <= 2.0 + 0.05


def test_1d_never_verifies_below_two():
    for a in (1.99, 1.999, 1.5, 0.5):
        assert not certify_horseshoe_1d(a).verified


def test_certificate_text_round_trip():
    cert = certify_horseshoe(10.0, 0.3)
    text = certificate_to_text(cert)
    back = certificate_from_text(text)
    assert back["a"] == cert.a
    assert back["b"] == cert.b
    assert back["box_radius"] == cert.box_radius
    assert back["strip_abs_x"].lo == cert.strip.lo
    assert back["strip_abs_x"].hi == cert.strip.hi
    assert back["verified"] is True


def test_boundary_scan_bracket_and_tangency_positive_b():
    rep = boundary_scan(0.01, (1.5, 4.0))
    lo, hi = rep.bracket
    assert 1.5 <= lo < hi <= 4.0
    mid = 0.5 * (lo + hi)
    assert abs(mid - 2.0) < 0.2
    # endpoints retain their defining predicates
    assert certify_horseshoe(hi, 0.01).verified
    t = rep.tangency
    assert t.p_equals_q
    assert abs(t.fit_c1) < 1e-3
    assert abs(t.fit_c2) > 0.01
    assert t.fit_residual_rms < 0.1 * abs(t.fit_c2) * t.fit_window ** 2


def test_boundary_scan_negative_b():
    rep = boundary_scan(-0.01, (1.5, 4.0))
    mid = 0.5 * (rep.bracket[0] + rep.bracket[1])
    assert abs(mid - 2.0) < 0.2
    t = rep.tangency
    assert not t.p_equals_q
    assert abs(t.fit_c1) < 1e-3
    assert abs(t.fit_c2) > 0.01


def test_boundary_scan_bracket_shrinks_by_halving():
    rep = boundary_scan(0.01, (1.5, 4.0))
    width = 4.0 - 1.5
    for mid, which in rep.steps:
        if which == "gap":
            break
        width /= 2
    assert rep.bracket[1] - rep.bracket[0] == pytest.approx(width)


def test_boundary_scan_precondition_validation():
    with pytest.raises(DomainError):
        boundary_scan(0.01, (1.5, 1.9))  # top not verified
    with pytest.raises(DomainError):
        boundary_scan(0.01, (2.2, 4.0))  # bottom not census-falsified


def test_tangency_quadratic_dominance_larger_b():
    t = find_tangency(2.2, 0.1)
    assert t.p_equals_q
    assert abs(t.fit_c2) > 0.1
    assert abs(t.fit_c1) < 1e-2
    assert t.tangent_angle_deg < 1.0
    assert len(t.approach_samples) > 3
