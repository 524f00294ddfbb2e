"""Periodic points, their eigendata, and unstable-manifold parameterizations.

Root finding works on the full orbit system: for period n the unknowns are
all n orbit points and the equations are f(p_i) = p_{i+1 mod n}.  This keeps
the Jacobian blocks of size O(1) instead of carrying the derivative of f^n,
whose norm grows like the expanding eigenvalue.

The linearizing parameterization phi of the unstable manifold solves
phi(lambda_u * z) = f^n(phi(z)), phi(0) = p, phi'(0) = v.  It is evaluated
as the limit of f^{nk}(p + v * lambda_u^-k * z).  To avoid losing the tiny
perturbation against the O(1) saddle coordinates, the iteration propagates
the deviation d from the exact orbit,

    d' = (-(2*px + dx)*dx - b*dy, dx),

which is algebraically identical to f(p + d) - f(p) but free of cancellation,
so the truncation error (~|lambda_u|^-k), not round-off, dominates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np

from .dynamics import (
    DomainError,
    HenonParams,
    Point2,
    henon_step,
    henon_step_back,
)

__all__ = [
    "SaddleRecord",
    "SearchBudget",
    "Linearization",
    "find_periodic",
    "fixed_points",
    "default_saddle",
    "linearize",
]

_HYP_MARGIN = 1e-6
_RESIDUAL_REQ = 1e-9


@dataclass(frozen=True)
class SaddleRecord:
    """A periodic point with period, eigendata and unstable direction.

    One record per orbit point; orbit mates share orbit_id, period and
    eigenvalues but carry their own location and unstable vector.  Non-saddle
    periodic points are kept and tagged rather than dropped.
    """

    location: Point2
    period: int
    exact_period: int
    lambda_u: complex
    lambda_s: complex
    unstable_vector: tuple[complex, complex]
    residual: float
    tag: str  # "saddle" | "attracting" | "repelling" | "non-hyperbolic"
    orbit_id: int = 0

    @property
    def is_saddle(self) -> bool:
        return self.tag == "saddle"

    @property
    def is_real(self) -> bool:
        p = self.location
        return max(abs(p.x.imag), abs(p.y.imag)) < 1e-8

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "exact_period": self.exact_period,
            "x_re": self.location.x.real,
            "x_im": self.location.x.imag,
            "y_re": self.location.y.real,
            "y_im": self.location.y.imag,
            "lambda_u_re": self.lambda_u.real,
            "lambda_u_im": self.lambda_u.imag,
            "lambda_s_re": self.lambda_s.real,
            "lambda_s_im": self.lambda_s.imag,
            "residual": self.residual,
            "tag": self.tag,
            "orbit_id": self.orbit_id,
        }


@dataclass(frozen=True)
class SearchBudget:
    n_starts: Optional[int] = None  # default 20 * 2^n
    newton_iters: int = 60
    residual_tol: float = 1e-12
    dedupe_tol: float = 1e-6
    continuation_steps: int = 4
    shadow_seeds: bool = True


def _dfs(params: HenonParams, xs: np.ndarray) -> np.ndarray:
    """Differentials [[-2x, -b], [1, 0]] for an array of x-coordinates."""
    m = np.zeros(xs.shape + (2, 2), dtype=xs.dtype)
    m[..., 0, 0] = -2.0 * xs
    m[..., 0, 1] = -params.b if np.iscomplexobj(xs) else -params.b.real
    m[..., 1, 0] = 1.0
    return m


def _orbit_residual(params: HenonParams, U: np.ndarray) -> np.ndarray:
    """F(U) for orbit arrays U of shape (m, n, 2)."""
    a, b = params.a, params.b
    if not np.iscomplexobj(U):
        a, b = a.real, b.real
    X, Y = U[:, :, 0], U[:, :, 1]
    FX = a - b * Y - X * X - np.roll(X, -1, axis=1)
    FY = X - np.roll(Y, -1, axis=1)
    return np.stack([FX, FY], axis=2)


def _orbit_jacobian(params: HenonParams, U: np.ndarray) -> np.ndarray:
    m, n, _ = U.shape
    J = np.zeros((m, 2 * n, 2 * n), dtype=U.dtype)
    b = params.b if np.iscomplexobj(U) else params.b.real
    idx = np.arange(n)
    nxt = (idx + 1) % n
    J[:, 2 * idx, 2 * idx] = -2.0 * U[:, idx, 0]
    J[:, 2 * idx, 2 * idx + 1] = -b
    J[:, 2 * idx + 1, 2 * idx] = 1.0
    # identity blocks accumulate: for n = 1 they overlap the Df block
    J[:, 2 * idx, 2 * nxt] += -1.0
    J[:, 2 * idx + 1, 2 * nxt + 1] += -1.0
    return J


def _newton_orbits(params: HenonParams, U0: np.ndarray, iters: int,
                   tol: float, radius: float) -> np.ndarray:
    """Run batched Newton from starts U0 (m, n, 2); return converged orbits."""
    U = U0.copy()
    m, n, _ = U.shape
    alive = np.ones(m, dtype=bool)
    step_cap = 2.0 * radius
    for _ in range(iters):
        if not alive.any():
            break
        F = _orbit_residual(params, U[alive])
        J = _orbit_jacobian(params, U[alive])
        rhs = -F.reshape(-1, 2 * n, 1)
        try:
            step = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError:
            eye = np.eye(2 * n, dtype=U.dtype) * 1e-10
            step = np.linalg.solve(J + eye, rhs)
        step = step.reshape(-1, n, 2)
        # damp wild steps so starts do not tunnel between basins
        mags = np.max(np.abs(step), axis=(1, 2))
        scale = np.where(mags > step_cap, step_cap / np.maximum(mags, 1e-300), 1.0)
        step *= scale[:, None, None]
        Ua = U[alive] + step
        U[alive] = Ua
        bad = ~np.isfinite(Ua).all(axis=(1, 2)) | (np.max(np.abs(Ua), axis=(1, 2)) > 1e6)
        sub = np.where(alive)[0]
        alive[sub[bad]] = False
    F = _orbit_residual(params, U)
    res = np.max(np.abs(F), axis=(1, 2))
    good = alive & np.isfinite(res) & (res < tol * max(1.0, radius))
    return U[good]


def _shadow_words_1d(param_a: complex, n: int, iters: int = 80) -> np.ndarray:
    """Periodic candidates of x -> a - x**2 from cyclic inverse codings.

    For each sign word s of length n, iterate the n-fold contraction
    w -> s_0 sqrt(a - s_1 sqrt(a - ...)); the limit is the periodic point
    with that itinerary whenever the inverse branches contract.
    """
    count = 1 << n
    bits = ((np.arange(count)[:, None] >> np.arange(n)[None, :]) & 1)
    signs = (2.0 * bits - 1.0).astype(np.complex128)
    w = np.zeros(count, dtype=np.complex128)
    a = complex(param_a)
    for _ in range(iters):
        for j in range(n - 1, -1, -1):
            w = signs[:, j] * np.sqrt(a - w)
    return w


def _shadow_orbit_seeds(params: HenonParams, n: int) -> np.ndarray:
    """Lift 1D coding candidates to orbit arrays (count, n, 2) at b ~ 0."""
    x0 = _shadow_words_1d(params.a, n)
    xs = np.empty((x0.size, n), dtype=np.complex128)
    xs[:, 0] = x0
    a = complex(params.a)
    for j in range(1, n):
        xs[:, j] = a - xs[:, j - 1] ** 2
    ys = np.roll(xs, 1, axis=1)  # y_i = x_{i-1} when b = 0
    keep = np.isfinite(xs).all(axis=1) & (np.max(np.abs(xs), axis=1) < 1e3)
    return np.stack([xs[keep], ys[keep]], axis=2)


def _continuation_solutions(params: HenonParams, n: int,
                            budget: SearchBudget) -> np.ndarray:
    """Track shadow seeds from b = 0 to the target b in small steps."""
    seeds = _shadow_orbit_seeds(params, n)
    if seeds.size == 0:
        return seeds
    radius = params.filtration_radius
    steps = max(1, budget.continuation_steps)
    sols = seeds
    for j in range(1, steps + 1):
        bj = params.b * (j / steps)
        pj = HenonParams(params.a, bj) if bj != 0 else params
        sols = _newton_orbits(pj, sols, budget.newton_iters,
                              budget.residual_tol, radius)
        if sols.size == 0:
            break
    return sols


def _random_starts(params: HenonParams, n: int, count: int, seed: int,
                   real: bool) -> np.ndarray:
    rng = np.random.default_rng((seed, n, int(real)))
    radius = params.filtration_radius
    if real:
        return rng.uniform(-radius, radius, size=(count, n, 2))
    r = radius * np.sqrt(rng.uniform(0, 1, size=(count, n, 2)))
    th = rng.uniform(0, 2 * np.pi, size=(count, n, 2))
    return r * np.exp(1j * th)


def _normalize_vector(v: np.ndarray) -> tuple[complex, complex]:
    v = v / np.linalg.norm(v)
    for comp in v:
        if abs(comp) > 1e-12:
            v = v * (abs(comp) / comp)
            break
    return complex(v[0]), complex(v[1])


def _classify(lu: complex, ls: complex, singular: bool) -> str:
    if singular:
        return "non-hyperbolic"
    if abs(lu) > 1 + _HYP_MARGIN and abs(ls) < 1 - _HYP_MARGIN:
        return "saddle"
    if abs(lu) < 1 - _HYP_MARGIN:
        return "attracting"
    if abs(ls) > 1 + _HYP_MARGIN:
        return "repelling"
    return "non-hyperbolic"


def _records_for_orbit(params: HenonParams, orbit: np.ndarray, n: int,
                       orbit_id: int) -> list[SaddleRecord]:
    pts = [Point2(complex(orbit[j, 0]), complex(orbit[j, 1])) for j in range(n)]
    # exact period = least divisor d of n with p_d = p_0
    exact = n
    for d in range(1, n):
        if n % d == 0 and abs(orbit[d % n, 0] - orbit[0, 0]) < 1e-8 \
                and abs(orbit[d % n, 1] - orbit[0, 1]) < 1e-8:
            exact = d
            break
    ms = _dfs(params, orbit[:, 0].astype(np.complex128))
    prod = np.eye(2, dtype=np.complex128)
    for j in range(n):
        prod = ms[j] @ prod
    try:
        vals, vecs = np.linalg.eig(prod)
        singular = False
    except np.linalg.LinAlgError:
        vals, vecs = np.array([0j, 0j]), np.eye(2, dtype=np.complex128)
        singular = True
    order = np.argsort(-np.abs(vals))
    lu, ls = complex(vals[order[0]]), complex(vals[order[1]])
    tag = _classify(lu, ls, singular)
    v = vecs[:, order[0]]
    records = []
    # an orbit of exact period d < n repeats its points; emit each point once
    for j in range(exact):
        q = pts[j]
        x, y = q.x, q.y
        for _ in range(n):
            x, y = henon_step(params, x, y)
        residual = max(abs(x - q.x), abs(y - q.y))
        records.append(SaddleRecord(
            location=q, period=n, exact_period=exact,
            lambda_u=lu, lambda_s=ls,
            unstable_vector=_normalize_vector(v.copy()),
            residual=float(residual), tag=tag, orbit_id=orbit_id,
        ))
        # transport the unstable direction to the next orbit point
        v = ms[j] @ v
        nv = np.linalg.norm(v)
        if nv > 0:
            v = v / nv
    return records


def find_periodic(
    params: HenonParams,
    n: int,
    search: Literal["complex_grid", "real_grid"] = "complex_grid",
    budget: Optional[SearchBudget] = None,
    seed: int = 0,
) -> list[SaddleRecord]:
    """All periodic points of period dividing n found by seeded Newton runs.

    Starts combine a seeded grid in the bidisk of the filtration radius with
    1D-shadow continuation seeds (inverse-coding candidates of the b = 0
    limit tracked to the target b), deduplicated to 1e-6.  Deterministic for
    a given seed and budget.  real_grid restricts arithmetic to R^2 and so
    returns only real periodic points.
    """
    if n < 1 or n > 12:
        raise DomainError("period must be in [1, 12]")
    if search not in ("complex_grid", "real_grid"):
        raise DomainError(f"unknown search mode {search!r}")
    budget = budget or SearchBudget()
    real = search == "real_grid"
    if real and (params.a.imag != 0 or params.b.imag != 0):
        raise DomainError("real_grid search requires real parameters")
    count = budget.n_starts if budget.n_starts is not None else 20 * (1 << n)
    radius = params.filtration_radius

    starts = _random_starts(params, n, count, seed, real)
    sols = _newton_orbits(params, starts, budget.newton_iters,
                          budget.residual_tol, radius)
    chunks = [sols.astype(np.complex128)]
    if budget.shadow_seeds:
        cont = _continuation_solutions(params, n, budget)
        if cont.size and real:
            near_real = np.max(np.abs(cont.imag), axis=(1, 2)) < 1e-8
            cont = cont[near_real]
        if cont.size:
            chunks.append(cont)
    sols = np.concatenate([c for c in chunks if c.size], axis=0) \
        if any(c.size for c in chunks) else chunks[0]
    if sols.size == 0:
        return []
    # final polish in complex arithmetic so eigendata comes out uniform
    sols = _newton_orbits(params, sols, 10, budget.residual_tol, radius)
    if sols.size == 0:
        return []

    # dedupe whole orbits by their lexicographically smallest point
    def orbit_key(orbit: np.ndarray) -> tuple:
        pts = sorted((orbit[j, 0].real, orbit[j, 0].imag,
                      orbit[j, 1].real, orbit[j, 1].imag) for j in range(n))
        return pts[0]

    order = sorted(range(sols.shape[0]), key=lambda i: orbit_key(sols[i]))
    unique: list[np.ndarray] = []
    for i in order:
        orb = sols[i]
        dup = False
        for u in unique:
            # same orbit iff some cyclic shift matches within tolerance
            for s in range(n):
                if np.max(np.abs(np.roll(u, s, axis=0) - orb)) < budget.dedupe_tol:
                    dup = True
                    break
            if dup:
                break
        if not dup:
            unique.append(orb)

    records: list[SaddleRecord] = []
    for oid, orb in enumerate(unique):
        records.extend(_records_for_orbit(params, orb, n, oid))
    records.sort(key=lambda r: (r.location.x.real, r.location.x.imag,
                                r.location.y.real, r.location.y.imag))
    return records


def fixed_points(params: HenonParams) -> list[SaddleRecord]:
    """The two fixed points from the closed-form quadratic x^2+(1+b)x-a = 0."""
    import cmath

    a, b = params.a, params.b
    disc = (1 + b) ** 2 + 4 * a
    root = cmath.sqrt(disc)
    records = []
    for oid, x in enumerate([(-(1 + b) + root) / 2, (-(1 + b) - root) / 2]):
        orb = np.array([[x, x]], dtype=np.complex128)
        records.extend(_records_for_orbit(params, orb, 1, oid))
    records.sort(key=lambda r: -abs(r.lambda_u))
    return [replace(r, orbit_id=i) for i, r in enumerate(records)]


def default_saddle(params: HenonParams) -> Optional[SaddleRecord]:
    """Fixed-point saddle with the largest expanding eigenvalue, if any."""
    saddles = [r for r in fixed_points(params) if r.is_saddle]
    return saddles[0] if saddles else None


@dataclass(eq=False)
class Linearization:
    """Evaluator for the manifold parameterization phi at one saddle.

    phi is entire with phi(0) = saddle location and phi'(0) = v; direction
    "backward" parameterizes the stable manifold by linearizing the inverse
    map (whose expanding multiplier is 1/lambda_s).  Large arguments are
    reduced into the unit disk with phi(multiplier^m z0) = f^{nm}(phi(z0)).
    """

    params: HenonParams
    saddle: SaddleRecord
    direction: Literal["forward", "backward"]
    orbit_x: np.ndarray  # (n,) complex orbit x-coordinates
    orbit_y: np.ndarray
    multiplier: complex
    vector: tuple[complex, complex]
    depth: int
    defect: float

    @property
    def period(self) -> int:
        return int(self.orbit_x.size)

    def _deviation_eval(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lam = self.multiplier
        b = self.params.b
        w = np.asarray(z, dtype=np.complex128) * lam ** (-self.depth)
        dx = self.vector[0] * w
        dy = self.vector[1] * w
        n = self.period
        back = self.direction == "backward"
        for step in range(self.depth * n):
            j = step % n
            px, py = self.orbit_x[j], self.orbit_y[j]
            if back:
                dx, dy = dy, (-(2.0 * py + dy) * dy - dx) / b
            else:
                dx, dy = -(2.0 * px + dx) * dx - b * dy, dx
        return self.orbit_x[0] + dx, self.orbit_y[0] + dy

    def __call__(self, z) -> tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=np.complex128)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        lam_mag = abs(self.multiplier)
        mags = np.abs(z)
        m = np.zeros(z.shape, dtype=np.int64)
        big = mags > 1.0
        m[big] = np.ceil(np.log(mags[big]) / math.log(lam_mag)).astype(np.int64)
        X = np.empty(z.shape, dtype=np.complex128)
        Y = np.empty(z.shape, dtype=np.complex128)
        step = henon_step_back if self.direction == "backward" else henon_step
        for mv in np.unique(m):
            sel = m == mv
            x, y = self._deviation_eval(z[sel] * self.multiplier ** (-int(mv)))
            alive = np.ones(x.shape, dtype=bool)
            for _ in range(int(mv) * self.period):
                xn, yn = step(self.params, x[alive], y[alive])
                x[alive], y[alive] = xn, yn
                alive[alive] = np.maximum(np.abs(xn), np.abs(yn)) < 1e100
                if not alive.any():
                    break
            X[sel], Y[sel] = x, y
        if scalar:
            return X[0], Y[0]
        return X, Y

    def point(self, z: complex) -> Point2:
        x, y = self(complex(z))
        return Point2(complex(x), complex(y))


def linearize(
    params: HenonParams,
    saddle: SaddleRecord,
    k_max: int = 60,
    direction: Literal["forward", "backward"] = "forward",
    samples: int = 64,
    target: float = 1e-10,
) -> Linearization:
    """Build phi for the saddle's unstable (or stable) manifold.

    The truncation depth is the first k <= k_max at which successive
    approximants agree to `target` on the unit circle; the reported defect
    is the functional-equation residual sup_z |f^n(phi(z)) - phi(lambda z)|
    there.  Non-convergence raises with the best defect achieved, which is
    the usual sign of near-tangency or ill-conditioned eigendata.
    """
    if saddle.residual > _RESIDUAL_REQ:
        raise DomainError(f"saddle residual {saddle.residual:.2e} too large")
    n = saddle.period
    ox = np.empty(n, dtype=np.complex128)
    oy = np.empty(n, dtype=np.complex128)
    x, y = saddle.location.x, saddle.location.y
    step = henon_step_back if direction == "backward" else henon_step
    for j in range(n):
        ox[j], oy[j] = x, y
        x, y = step(params, x, y)

    if direction == "forward":
        lam = saddle.lambda_u
        vec = saddle.unstable_vector
    else:
        lam = 1.0 / saddle.lambda_s
        # stable eigenvector of Df^n = expanding direction of the inverse
        ms = _dfs(params, ox.astype(np.complex128))
        prod = np.eye(2, dtype=np.complex128)
        for j in range(n):
            prod = ms[j] @ prod
        vals, vecs = np.linalg.eig(prod)
        order = np.argsort(np.abs(vals))
        vec = _normalize_vector(vecs[:, order[0]].copy())
    if abs(lam) <= 1 + _HYP_MARGIN:
        raise DomainError("multiplier is not expanding; not a saddle direction")

    lin = Linearization(params=params, saddle=saddle, direction=direction,
                        orbit_x=ox, orbit_y=oy, multiplier=lam, vector=vec,
                        depth=1, defect=math.inf)
    circle = np.exp(2j * np.pi * np.arange(samples) / samples)
    prev = None
    best = (math.inf, 1)
    for k in range(1, k_max + 1):
        lin.depth = k
        cur = np.stack(lin._deviation_eval(circle))
        if prev is not None:
            diff = float(np.max(np.abs(cur - prev)))
            if diff < best[0]:
                best = (diff, k)
            if diff < target:
                lin.defect = _functional_defect(lin, circle)
                return lin
        prev = cur
    lin.depth = best[1]
    lin.defect = _functional_defect(lin, circle)
    raise DomainError(
        f"linearization did not converge within k_max={k_max}; "
        f"best successive difference {best[0]:.3e}, defect {lin.defect:.3e}"
    )


def _functional_defect(lin: Linearization, circle: np.ndarray) -> float:
    x, y = lin._deviation_eval(circle)
    step = henon_step_back if lin.direction == "backward" else henon_step
    for _ in range(lin.period):
        x, y = step(lin.params, x, y)
    x2, y2 = lin._deviation_eval(circle * lin.multiplier)
    return float(np.max(np.maximum(np.abs(x - x2), np.abs(y - y2))))
