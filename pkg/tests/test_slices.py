import math

import numpy as np
import pytest

from henonlab.dynamics import BudgetExceeded, DomainError, HenonParams
from henonlab.hslc import (
    PARAM_CONNECTED,
    PARAM_DISCONNECTED,
    STATUS_BOUNDED,
    STATUS_ESCAPED,
    SliceImage,
    from_bytes,
    to_bytes,
    to_ppm,
)
from henonlab.potential import sample_mu
from henonlab.saddles import default_saddle, linearize
from henonlab.slices import (
    ParamRegion,
    ProbeBudget,
    component_verdict,
    detect_compact_components,
    estimate_lambda_plus,
    find_unstable_critical_points,
    leaf_laplacian,
    render_parameter_plane,
    render_slice,
    unstable_connectivity,
)

PARAMS = HenonParams(6.0, 0.3)
SADDLE = default_saddle(PARAMS)
LIN = linearize(PARAMS, SADDLE)

CONN = HenonParams(0.1, 0.1)
CONN_LIN = linearize(CONN, default_saddle(CONN))


def test_center_cell_is_bounded():
    # odd resolution puts a cell center exactly at z = 0, the saddle itself
    img = render_slice(PARAMS, LIN, (-5.0, -5.0, 5.0, 5.0), 101, depth=50)
    assert img.status[50, 50] == STATUS_BOUNDED


def test_bounded_fraction_small_at_horseshoe():
    img = render_slice(PARAMS, LIN, (-10, -10, 10, 10), 1024, depth=100)
    assert img.bounded_fraction() < 0.2
    img2 = render_slice(PARAMS, LIN, (-10, -10, 10, 10), 512, depth=100)
    assert abs(img.bounded_fraction() - img2.bounded_fraction()) < 0.02


def test_depth_monotone_escape_is_permanent():
    img1 = render_slice(CONN, CONN_LIN, (-4, -4, 4, 4), 128, depth=30)
    img2 = render_slice(CONN, CONN_LIN, (-4, -4, 4, 4), 128, depth=60)
    esc1 = img1.status == STATUS_ESCAPED
    esc2 = img2.status == STATUS_ESCAPED
    assert np.all(esc2[esc1])


def test_resolution_monotone_refinement():
    # every coarse bounded cell contains at least one fine bounded cell
    img1 = render_slice(CONN, CONN_LIN, (-4, -4, 4, 4), 64, depth=100)
    img2 = render_slice(CONN, CONN_LIN, (-4, -4, 4, 4), 128, depth=100)
    b1 = img1.status == STATUS_BOUNDED
    b2 = img2.status == STATUS_BOUNDED
    fine = b2.reshape(64, 2, 64, 2).any(axis=(1, 3))
    assert np.all(fine[b1])


def test_render_determinism():
    img1 = render_slice(PARAMS, LIN, (-3, -3, 3, 3), 128, depth=40)
    img2 = render_slice(PARAMS, LIN, (-3, -3, 3, 3), 128, depth=40)
    assert to_bytes(img1) == to_bytes(img2)


def test_render_guards():
    with pytest.raises(DomainError):
        render_slice(PARAMS, LIN, (-1, -1, 1, 1), 99999, depth=10)
    with pytest.raises(DomainError):
        render_slice(PARAMS, LIN, (-1, -1, 1, 1), 64, depth=10 ** 7)
    bad = linearize(PARAMS, SADDLE)
    bad.defect = 1.0
    with pytest.raises(DomainError):
        render_slice(PARAMS, bad, (-1, -1, 1, 1), 64, depth=10)


def _synthetic(status: np.ndarray) -> SliceImage:
    rates = np.where(status == STATUS_ESCAPED, 1.0, 0.0).astype(np.float32)
    return SliceImage(rates=rates, status=status.astype(np.uint8),
                      window=(-1.0, -1.0, 1.0, 1.0),
                      provenance={"kind": "dyn", "depth": 1})


def test_components_interior_blob():
    status = np.full((32, 32), STATUS_ESCAPED, dtype=np.uint8)
    status[10:15, 12:18] = STATUS_BOUNDED
    v = detect_compact_components(_synthetic(status))
    assert v.verdict == "unstably_disconnected"
    assert len(v.component_boxes) == 1
    x0, y0, x1, y1 = v.component_boxes[0]
    assert x0 < x1 and y0 < y1


def test_components_crossing_band():
    status = np.full((32, 32), STATUS_ESCAPED, dtype=np.uint8)
    status[:, 14:17] = STATUS_BOUNDED
    v = detect_compact_components(_synthetic(status))
    assert v.verdict == "unstably_connected_at_resolution"


def test_components_all_bounded_undecided():
    status = np.full((16, 16), STATUS_BOUNDED, dtype=np.uint8)
    v = detect_compact_components(_synthetic(status))
    assert v.verdict == "undecided"


def test_components_none_bounded_undecided():
    status = np.full((16, 16), STATUS_ESCAPED, dtype=np.uint8)
    v = detect_compact_components(_synthetic(status))
    assert v.verdict == "undecided"


def test_critical_points_nonempty_at_horseshoe():
    recs = find_unstable_critical_points(PARAMS, LIN, (-10, -10, 10, 10),
                                         depth=400, grid=96)
    certified = [c for c in recs if c.certified]
    assert certified
    for c in certified:
        assert c.green_value > 1e-4
        assert c.gradient_norm < 1e-6


def test_critical_points_empty_at_connected():
    recs = find_unstable_critical_points(CONN, CONN_LIN, (-8, -8, 8, 8),
                                         depth=400, grid=96)
    assert [c for c in recs if c.certified] == []


def test_harmonicity_at_critical_point():
    recs = find_unstable_critical_points(PARAMS, LIN, (-10, -10, 10, 10),
                                         depth=400, grid=64)
    c = next(r for r in recs if r.certified)
    h = 1e-3
    lap = leaf_laplacian(PARAMS, LIN, c.z, h=h)
    # g is harmonic along the leaf where positive: discrete Laplacian O(h^2)
    assert abs(lap) * h * h < 1e-3


def test_lambda_single_orbit_exact():
    mu = sample_mu(PARAMS, (1, 1), seed=0)
    one = type(mu)(records=mu.records[:1], period_range=(1, 1), seed=0)
    est = estimate_lambda_plus(PARAMS, one)
    assert est.value == pytest.approx(math.log(abs(mu.records[0].lambda_u)))
    assert est.stderr == 0.0


def test_lambda_exceeds_log2_at_horseshoe():
    mu = sample_mu(PARAMS, (1, 5), seed=0)
    lp = estimate_lambda_plus(PARAMS, mu)
    assert lp.value > math.log(2) + 0.1
    # two period ranges agree on the strictness margin
    mu2 = sample_mu(PARAMS, (1, 3), seed=0)
    lp2 = estimate_lambda_plus(PARAMS, mu2)
    assert lp2.value > math.log(2) + 0.1


def test_certified_critical_point_implies_strict_expansion():
    # a certified critical point comes with lambda+ strictly above log 2
    recs = find_unstable_critical_points(PARAMS, LIN, (-10, -10, 10, 10),
                                         depth=400, grid=64)
    assert any(c.certified for c in recs)
    mu = sample_mu(PARAMS, (1, 4), seed=0)
    lp = estimate_lambda_plus(PARAMS, mu)
    assert lp.value - math.log(2) > lp.stderr


BATTERY = [(6.0, 0.3), (0.1, 0.1), (4.0, 0.3), (2.0, -0.5), (8.0, 0.5),
           (0.2, 0.2), (0.15, -0.2), (5.0, -0.3), (3.0, 0.1), (7.0, 0.8)]


def test_method_agreement_battery():
    for (a, b) in BATTERY:
        asm = unstable_connectivity(HenonParams(a, b))
        pair = {asm.critical.verdict, asm.components.verdict}
        assert pair != {"unstably_disconnected",
                        "unstably_connected_at_resolution"}, (a, b)


def test_battery_anchor_verdicts():
    asm = unstable_connectivity(PARAMS)
    assert asm.combined == "unstably_disconnected"
    asm = unstable_connectivity(CONN)
    assert asm.combined == "unstably_connected_at_resolution"


def test_stable_side_probe_disconnected_for_dissipative():
    # |b| < 1 never stably connected: probing the inverse-conjugate map's
    # unstable side must find critical points (regression expectation)
    from henonlab.dynamics import inverse_conjugate

    for (a, b) in [(6.0, 0.3), (4.0, 0.3), (2.0, -0.5)]:
        params = HenonParams(a, b)
        g = inverse_conjugate(params)
        asm = unstable_connectivity(g)
        assert asm.critical.verdict == "unstably_disconnected", (a, b)


def test_param_plane_b_zero_rejected():
    region = ParamRegion(kind="complex_a", b=0.0, re0=0, im0=0, re1=1, im1=1)
    with pytest.raises(DomainError):
        render_parameter_plane(region, "connectivity", 4)


def test_param_plane_cost_guard():
    region = ParamRegion(kind="complex_a", b=0.3, re0=0, im0=0, re1=1, im1=1)
    budget = ProbeBudget(zgrid=256, depth=100000)
    with pytest.raises(BudgetExceeded):
        render_parameter_plane(region, "connectivity", 512, budget)


def test_param_plane_deterministic():
    region = ParamRegion(kind="complex_a", b=0.3, re0=3.0, im0=-0.2,
                         re1=5.0, im1=0.2, )
    budget = ProbeBudget(zgrid=24, depth=60)
    img1 = render_parameter_plane(region, "connectivity", (4, 2), budget)
    img2 = render_parameter_plane(region, "connectivity", (4, 2), budget)
    assert to_bytes(img1) == to_bytes(img2)


def test_param_plane_transition_near_1d_boundary():
    # b small: the connectivity verdict flips near a = 2, where the 1D
    # critical orbit's escape flips (the quadratic-family boundary point)
    lo, hi = 1.85, 2.15
    n = 13
    region = ParamRegion(kind="complex_a", b=0.01, re0=lo, im0=-1e-6,
                         re1=hi, im1=1e-6)
    budget = ProbeBudget(zgrid=48, depth=200)
    img = render_parameter_plane(region, "connectivity", (n, 1), budget)
    status = img.status[0]
    centers = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    conn = [c for c, s in zip(centers, status) if s == PARAM_CONNECTED]
    disc = [c for c, s in zip(centers, status) if s == PARAM_DISCONNECTED]
    assert conn and disc
    flip = (max(conn) + min(disc)) / 2
    assert abs(flip - 2.0) < 0.05
    assert max(conn) < min(disc)  # clean transition on this scan


def test_param_plane_escape_of_measure_probe():
    region = ParamRegion(kind="complex_a", b=0.3, re0=-1.0, im0=-0.5,
                         re1=3.0, im1=0.5)
    img = render_parameter_plane(region, "escape_of_measure", (16, 4))
    assert img.provenance["probe"] == "escape_of_measure"
    assert (img.status == PARAM_CONNECTED).any()
    assert (img.status == PARAM_DISCONNECTED).any()


def test_hslc_round_trip():
    img = render_slice(PARAMS, LIN, (-3, -3, 3, 3), 32, depth=20)
    data = to_bytes(img)
    back = from_bytes(data)
    assert np.array_equal(back.rates, img.rates)
    assert np.array_equal(back.status, img.status)
    assert back.window == img.window
    assert back.provenance == img.provenance
    ppm = to_ppm(img)
    assert ppm.startswith(b"P6\n32 32\n255\n")
    assert len(ppm) == len(b"P6\n32 32\n255\n") + 32 * 32 * 3


def test_component_verdict_schedule_depth_recorded():
    v = component_verdict(PARAMS, LIN)
    assert v.verdict == "unstably_disconnected"
    assert v.depth in (64, 32, 16, 12, 8, 6, 4, 3, 2)
    assert v.component_boxes
