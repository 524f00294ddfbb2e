import math

import numpy as np
import pytest
from scipy import stats

from henonlab.dynamics import DomainError, QuadParam
from henonlab.quadratic import (
    brolin_sample,
    connectivity_1d,
    escape_time_1d,
    green_1d,
    harmonic_angle,
    lyapunov_1d,
)

LOG2 = math.log(2.0)

# Chebyshev conjugacy at a = 2: with x = -(w + 1/w) the map doubles w, so
# G(z) = log|w| with |w| > 1.  For z = 3, w solves w^2 + 3w + 1 = 0.
G_AT_3 = math.log((3 + math.sqrt(5)) / 2)


def test_green_critical_point_a2():
    g = green_1d(QuadParam(2.0), 0.0, tol=1e-12)
    assert g.value == 0.0
    assert g.escaped_at is None


def test_green_superattracting():
    g = green_1d(QuadParam(0.0), 0.0)
    assert g.value == 0.0 and g.assumed_in_k


def test_green_chebyshev_value():
    g = green_1d(QuadParam(2.0), 3.0, tol=1e-12)
    assert g.escaped_at == 0
    assert abs(g.value - G_AT_3) <= g.error_bound + 1e-12
    assert g.error_bound <= 1e-12


def test_green_tol_guard():
    with pytest.raises(DomainError):
        green_1d(QuadParam(2.0), 3.0, tol=1e-15)


def test_green_functional_equation():
    # G(f(z)) = 2 G(z) within the certified bounds, on random escaping z
    rng = np.random.default_rng(0)
    param = QuadParam(1.0 + 0.2j)
    a = param.a
    count = 0
    while count < 100:
        z = complex(*rng.uniform(-4, 4, 2))
        g1 = green_1d(param, z, tol=1e-12)
        if g1.escaped_at is None:
            continue
        g2 = green_1d(param, a - z * z, tol=1e-12)
        assert abs(g2.value - 2 * g1.value) <= 2 * (g1.error_bound + g2.error_bound) + 1e-13
        count += 1


def test_green_holder_smoke():
    # |G(z) - G(z+h)| <= C |h|^0.1 with a generous C on a connected case
    param = QuadParam(1.0)
    hs = [1e-3, 1e-4]
    zs = [2.2 + 0.1j, 2.5, 3.0 + 0.5j, 2.05 + 0.01j]
    for z in zs:
        for h in hs:
            g0 = green_1d(param, z, tol=1e-12).value
            g1 = green_1d(param, z + h, tol=1e-12).value
            assert abs(g1 - g0) <= 50.0 * h ** 0.1


def test_connectivity_a2_connected():
    # critical orbit 0 -> 2 -> -2 -> -2 ... stays on the fixed point
    res = connectivity_1d(QuadParam(2.0), 2000)
    assert res.verdict == "connected"


def test_connectivity_a3_disconnected():
    # hand-iterate: 0 -> 3 -> -6 -> -33, already past the escape radius
    res = connectivity_1d(QuadParam(3.0), 2000)
    assert res.verdict == "disconnected"
    assert res.escape_step <= 3


def brute_force_bounded(a: complex, steps: int = 10 ** 6, bound: float = 1e6) -> bool:
    x = 0.0 + 0.0j
    for _ in range(steps):
        x = a - x * x
        if abs(x) > bound:
            return False
    return True


def test_connectivity_matches_brute_force_am1():
    a = -1.0
    res = connectivity_1d(QuadParam(a), 4096)
    assert (res.verdict == "connected") == brute_force_bounded(a)


def test_brolin_points_in_julia_interval():
    sample = brolin_sample(QuadParam(2.0), 500, depth=40, seed=1)
    assert np.all(np.abs(sample.points.imag) < 1e-6)
    assert np.all(sample.points.real > -2 - 1e-6)
    assert np.all(sample.points.real < 2 + 1e-6)


def test_brolin_points_near_certified_enclosure():
    # every sample lies within 1e-6 of a point that never certifies escape
    # within a depth-scaled budget (at a = 2 the projection to [-2, 2])
    param = QuadParam(2.0)
    sample = brolin_sample(param, 100, depth=40, seed=3)
    for z in sample.points[:50]:
        proj = complex(min(2.0, max(-2.0, z.real)), 0.0)
        assert abs(z - proj) < 1e-6
        assert not escape_time_1d(param, proj, 4 * sample.depth).escaped


def test_brolin_arcsine_law():
    sample = brolin_sample(QuadParam(2.0), 10_000, depth=40, seed=0)
    u = harmonic_angle(sample.points)
    ks = stats.kstest(u, "uniform").statistic
    assert ks < 0.02


def test_brolin_deterministic():
    s1 = brolin_sample(QuadParam(1.3), 64, depth=30, seed=42)
    s2 = brolin_sample(QuadParam(1.3), 64, depth=30, seed=42)
    assert np.array_equal(s1.points, s2.points)


def test_brolin_validation():
    with pytest.raises(DomainError):
        brolin_sample(QuadParam(2.0), 10, depth=5)
    with pytest.raises(DomainError):
        brolin_sample(QuadParam(2.0), 0)


def test_lyapunov_critical_formula_a2():
    est = lyapunov_1d(QuadParam(2.0), "critical_formula", tol=1e-9)
    assert abs(est.value - LOG2) <= 1e-9
    assert est.stderr <= 1e-9


def test_lyapunov_ergodic_a2():
    est = lyapunov_1d(QuadParam(2.0), "ergodic_average", n_points=100_000, seed=0)
    assert abs(est.value - LOG2) < 0.01


def test_lyapunov_cross_method_a3():
    f = lyapunov_1d(QuadParam(3.0), "critical_formula", tol=1e-10)
    e = lyapunov_1d(QuadParam(3.0), "ergodic_average", n_points=100_000, seed=0)
    assert f.value > LOG2 and e.value > LOG2
    sigma = math.hypot(f.stderr, e.stderr)
    assert abs(f.value - e.value) <= 3 * max(sigma, 1e-3)


def test_lyapunov_rejects_near_critical_samples():
    est = lyapunov_1d(QuadParam(2.0), "ergodic_average", n_points=1000, seed=0)
    assert est.rejected >= 0  # recorded, usually zero


def test_connectivity_exponent_link_sweep():
    # connected <=> lambda = log 2, both through G(0); plus strictness on
    # the disconnected side
    rng = np.random.default_rng(9)
    for a in rng.uniform(-2, 4, 20):
        verdict = connectivity_1d(QuadParam(a), 4096).verdict
        est = lyapunov_1d(QuadParam(a), "critical_formula", tol=1e-10)
        if verdict == "connected":
            assert abs(est.value - LOG2) <= 1e-9
        else:
            assert est.value > LOG2 + 1e-9


def test_dimension_relation():
    rng = np.random.default_rng(10)
    for a in rng.uniform(-2, 4, 20):
        est = lyapunov_1d(QuadParam(a), "critical_formula", tol=1e-10)
        assert est.hausdorff_dim <= 1.0 + 1e-9
        if connectivity_1d(QuadParam(a), 4096).verdict == "connected":
            assert est.hausdorff_dim == pytest.approx(1.0, abs=1e-9)
