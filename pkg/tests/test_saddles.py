import cmath
import math

import numpy as np
import pytest

from henonlab.dynamics import DomainError, HenonParams, Point2, iterate
from henonlab.saddles import (
    default_saddle,
    find_periodic,
    fixed_points,
    linearize,
)

PARAMS = HenonParams(6.0, 0.3)


def closed_form_fixed_xs(a: complex, b: complex) -> list[complex]:
    root = cmath.sqrt((1 + b) ** 2 + 4 * a)
    return [(-(1 + b) + root) / 2, (-(1 + b) - root) / 2]


def test_fixed_points_match_quadratic_formula():
    recs = find_periodic(PARAMS, 1, seed=0)
    assert len(recs) == 2
    expect = sorted(closed_form_fixed_xs(6.0, 0.3), key=lambda z: z.real)
    got = sorted((r.location.x for r in recs), key=lambda z: z.real)
    for e, g in zip(expect, got):
        assert abs(e - g) < 1e-10


def test_period2_sum_and_product():
    """Exact period-2 x-coordinates against hand elimination and sympy.

    Eliminating the orbit equations x0^2 = a - (1+b)x1, x1^2 = a - (1+b)x0
    gives x0 + x1 = 1 + b and x0*x1 = (1 + b)^2 - a.  The sympy resultant
    of the same system is the independent oracle.
    """
    a, b = 6.0, 0.3
    recs = [r for r in find_periodic(PARAMS, 2, seed=0) if r.exact_period == 2]
    assert len(recs) == 2
    x0, x1 = (r.location.x for r in recs)
    assert abs((x0 + x1) - (1 + b)) < 1e-9
    assert abs(x0 * x1 - ((1 + b) ** 2 - a)) < 1e-9

    import sympy as sp

    X0, X1 = sp.symbols("x0 x1")
    b_sp = 1 + sp.Rational(3, 10)
    e1 = X0 ** 2 - (sp.Integer(6) - b_sp * X1)
    e2 = X1 ** 2 - (sp.Integer(6) - b_sp * X0)
    res = sp.resultant(sp.Poly(e1, X1, X0), sp.Poly(e2, X1, X0), X1)
    poly = sp.Poly(res, X0)
    roots = [complex(r) for r in sp.nroots(poly)]
    fixed = closed_form_fixed_xs(a, b)
    cycle_roots = [r for r in roots
                   if min(abs(r - f) for f in fixed) > 1e-6]
    assert len(cycle_roots) == 2
    for x in (x0, x1):
        assert min(abs(x - r) for r in cycle_roots) < 1e-8


def test_all_counts_and_classification():
    for n in range(1, 7):
        recs = find_periodic(PARAMS, n, seed=0)
        assert len(recs) == 2 ** n
        assert all(r.is_real for r in recs)
        assert all(r.is_saddle for r in recs)
        assert all(r.residual <= 1e-9 for r in recs)
        for r in recs:
            assert abs(r.lambda_u) > 1 + 1e-6
            assert abs(r.lambda_s) < 1 - 1e-6


def test_eigen_relation_det():
    for r in find_periodic(PARAMS, 3, seed=0):
        det = r.lambda_u * r.lambda_s
        assert abs(det - PARAMS.b ** r.period) < 1e-8


def test_unstable_vector_is_eigenvector():
    import numpy.linalg as la

    for r in find_periodic(PARAMS, 2, seed=0):
        # assemble Df^n along the orbit starting at this record
        m = np.eye(2, dtype=np.complex128)
        p = r.location
        for _ in range(r.period):
            df = np.array([[-2 * p.x, -PARAMS.b], [1.0, 0.0]], dtype=np.complex128)
            m = df @ m
            p = iterate(PARAMS, p, 1)
        v = np.array(r.unstable_vector)
        assert la.norm(m @ v - r.lambda_u * v) < 1e-8
        assert la.norm(v) == pytest.approx(1.0, abs=1e-12)


def test_no_real_fixed_points_when_discriminant_negative():
    # (1+b)^2 + 4a < 0 at a = -10, b = 0.3
    params = HenonParams(-10.0, 0.3)
    cplx = find_periodic(params, 1, "complex_grid", seed=0)
    real = find_periodic(params, 1, "real_grid", seed=0)
    assert len(cplx) == 2
    assert all(not r.is_real for r in cplx)
    assert len(real) == 0


def test_orbit_closure():
    recs = find_periodic(PARAMS, 3, seed=0)
    locs = [(r.orbit_id, r.location) for r in recs]
    for oid, loc in locs:
        img = iterate(PARAMS, loc, 1)
        mates = [l for o, l in locs if o == oid]
        assert any(img.is_close(m, 1e-8) for m in mates)


def test_determinism():
    r1 = find_periodic(PARAMS, 4, seed=5)
    r2 = find_periodic(PARAMS, 4, seed=5)
    assert [(r.location.x, r.location.y) for r in r1] == \
           [(r.location.x, r.location.y) for r in r2]


def test_period_guard():
    with pytest.raises(DomainError):
        find_periodic(PARAMS, 13)


def test_default_saddle_largest_multiplier():
    s = default_saddle(PARAMS)
    fps = fixed_points(PARAMS)
    assert abs(s.lambda_u) == max(abs(r.lambda_u) for r in fps)


# --- linearization ---------------------------------------------------------


def test_linearize_fixes_origin():
    s = default_saddle(PARAMS)
    lin = linearize(PARAMS, s)
    p0 = lin.point(0.0)
    assert p0.x == s.location.x and p0.y == s.location.y


def test_linearize_defect_on_unit_circle():
    s = default_saddle(PARAMS)
    lin = linearize(PARAMS, s)
    assert lin.defect < 1e-8


def test_linearize_derivative_normalization():
    s = default_saddle(PARAMS)
    lin = linearize(PARAMS, s)
    h = 1e-6
    p0 = lin.point(0.0)
    ph = lin.point(h)
    dx = (ph.x - p0.x) / h
    dy = (ph.y - p0.y) / h
    assert abs(dx - s.unstable_vector[0]) < 1e-4
    assert abs(dy - s.unstable_vector[1]) < 1e-4


def test_linearize_scaling_covariance():
    from dataclasses import replace

    s = default_saddle(PARAMS)
    lin1 = linearize(PARAMS, s)
    v2 = (2 * s.unstable_vector[0], 2 * s.unstable_vector[1])
    lin2 = linearize(PARAMS, replace(s, unstable_vector=v2))
    for z in (0.3, 0.2 + 0.1j, -0.45j):
        x1, y1 = lin1(2 * z)
        x2, y2 = lin2(z)
        assert abs(x1 - x2) < 1e-7 and abs(y1 - y2) < 1e-7


def test_linearize_functional_equation_pointwise():
    s = default_saddle(PARAMS)
    lin = linearize(PARAMS, s)
    z = 0.37 - 0.21j
    x, y = lin(z)
    fx, fy = (PARAMS.a - PARAMS.b * y - x * x), x
    x2, y2 = lin(s.lambda_u * z)
    assert abs(fx - x2) < 1e-8 and abs(fy - y2) < 1e-8


def test_linearize_large_argument_extension():
    s = default_saddle(PARAMS)
    lin = linearize(PARAMS, s)
    # compare the extension against applying f twice
    z = 0.4 + 0.2j
    x, y = lin(z)
    for _ in range(2):
        x, y = (PARAMS.a - PARAMS.b * y - x * x), x
    lam2 = s.lambda_u ** 2
    x2, y2 = lin(lam2 * z)
    assert abs(x - x2) < 1e-6 and abs(y - y2) < 1e-6


def test_linearize_nonconvergence_reports_defect():
    s = default_saddle(PARAMS)
    with pytest.raises(DomainError) as err:
        linearize(PARAMS, s, k_max=2)
    assert "defect" in str(err.value)


def test_linearize_backward_parameterizes_stable_manifold():
    s = default_saddle(PARAMS)
    lin = linearize(PARAMS, s, direction="backward")
    # points of the stable manifold approach the saddle forward in time
    # (until round-off re-excites the unstable direction)
    x, y = lin(0.7)
    p = Point2(complex(x), complex(y))
    closest = float("inf")
    for _ in range(12):
        p = iterate(PARAMS, p, 1)
        closest = min(closest, max(abs(p.x - s.location.x),
                                   abs(p.y - s.location.y)))
    assert closest < 1e-8
