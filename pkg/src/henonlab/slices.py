"""Escape-rate pictures of unstable-manifold slices and connectivity probes.

A slice picture samples g(z) = G+(phi(z)) over a rectangle of the
linearizing plane: z = 0 is the saddle, black cells never certified escape.
Unstable connectivity is decided two independent ways and the methods must
agree (never opposite certainties):

  * compact components: flood-fill the bounded cells; a bounded component
    that avoids the window boundary is evidence of disconnection;
  * critical points: where g > 0 the function is harmonic along the leaf,
    and an interior critical point of g obstructs connectivity; candidates
    are grid minima of |grad g| refined by descent on |grad g|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from scipy import ndimage

from .dynamics import BudgetExceeded, DomainError, HenonParams, Point2
from .hslc import (
    PARAM_CONNECTED,
    PARAM_DISCONNECTED,
    PARAM_UNDECIDED,
    STATUS_BOUNDED,
    STATUS_ESCAPED,
    SliceImage,
)
from .potential import green_2d, green_plus_batch
from .quadratic import ExponentEstimate, green_1d
from .saddles import Linearization, SaddleRecord, default_saddle, linearize
from .potential import MeasureSample2D

__all__ = [
    "ConnectivityVerdict",
    "CriticalPointRecord",
    "ParamRegion",
    "ProbeBudget",
    "render_slice",
    "detect_compact_components",
    "find_unstable_critical_points",
    "estimate_lambda_plus",
    "estimate_lambda_minus",
    "render_parameter_plane",
    "saddle_label",
]

_MAX_RESOLUTION = 16384
_MAX_DEPTH = 100_000


def saddle_label(saddle: SaddleRecord) -> str:
    return f"p{saddle.period}n{saddle.orbit_id}"


def _grid(window: tuple[float, float, float, float], w: int, h: int) -> np.ndarray:
    x0, y0, x1, y1 = window
    xs = x0 + (np.arange(w) + 0.5) * (x1 - x0) / w
    ys = y0 + (np.arange(h) + 0.5) * (y1 - y0) / h
    return xs[None, :] + 1j * ys[:, None]


def render_slice(
    params: HenonParams,
    lin: Linearization,
    window: tuple[float, float, float, float] = (-10.0, -10.0, 10.0, 10.0),
    resolution: int | tuple[int, int] = 512,
    depth: int = 200,
    rate_tol: float = 1e-6,
    defect_threshold: float = 1e-6,
) -> SliceImage:
    """Render G+ along the parameterized manifold over a z-plane window.

    Bit-deterministic in its provenance; refuses linearizations whose
    functional-equation defect exceeds the threshold, since pixels would
    then sample the wrong leaf.
    """
    w, h = (resolution, resolution) if isinstance(resolution, int) else resolution
    if not (1 <= w <= _MAX_RESOLUTION and 1 <= h <= _MAX_RESOLUTION):
        raise DomainError(f"resolution must be within 1..{_MAX_RESOLUTION}")
    if not (1 <= depth <= _MAX_DEPTH):
        raise DomainError(f"depth must be within 1..{_MAX_DEPTH}")
    if lin.defect > defect_threshold:
        raise DomainError(
            f"linearization defect {lin.defect:.3e} exceeds {defect_threshold:.1e}; "
            "refusing to render from an unreliable parameterization"
        )
    z = _grid(window, w, h)
    X, Y = lin(z)
    value, escaped, _ = green_plus_batch(params, X, Y, depth, rate_tol)
    status = np.where(escaped, STATUS_ESCAPED, STATUS_BOUNDED).astype(np.uint8)
    prov = {
        "kind": "dyn",
        "a_re": params.a.real, "a_im": params.a.imag,
        "b_re": params.b.real, "b_im": params.b.imag,
        "saddle": saddle_label(lin.saddle),
        "saddle_x_re": lin.saddle.location.x.real,
        "saddle_x_im": lin.saddle.location.x.imag,
        "direction": lin.direction,
        "depth": depth,
        "rate_tol": rate_tol,
        "w": w, "h": h,
        "window": list(window),
    }
    return SliceImage(rates=value.astype(np.float32), status=status,
                      window=tuple(window), provenance=prov)


@dataclass(frozen=True)
class CriticalPointRecord:
    """A located critical point of g = G+ restricted to the leaf."""

    z: complex
    green_value: float
    gradient_norm: float
    certified: bool


@dataclass(frozen=True)
class ConnectivityVerdict:
    verdict: Literal["unstably_connected_at_resolution",
                     "unstably_disconnected", "undecided"]
    method: str
    component_boxes: tuple[tuple[float, float, float, float], ...] = ()
    critical_points: tuple[CriticalPointRecord, ...] = ()
    note: str = ""
    window: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
    resolution: tuple[int, int] = (0, 0)
    depth: int = 0

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "method": self.method,
            "component_boxes": [list(b) for b in self.component_boxes],
            "critical_points": [
                {"z_re": c.z.real, "z_im": c.z.imag,
                 "green_value": c.green_value,
                 "gradient_norm": c.gradient_norm,
                 "certified": c.certified}
                for c in self.critical_points
            ],
            "note": self.note,
            "window": list(self.window),
            "resolution": list(self.resolution),
            "depth": self.depth,
        }


def detect_compact_components(img: SliceImage, min_pixels: int = 1) -> ConnectivityVerdict:
    """Flood-fill verdict: compact bounded components witness disconnection.

    Bounded-at-depth cells count as bounded (membership is semi-decidable),
    so the verdict is tagged with the resolution and depth it was made at.
    8-connectivity; components touching the window edge are inconclusive.
    min_pixels discards interior components too small to distinguish from
    pixelization of a thin band.
    """
    bounded = img.status == STATUS_BOUNDED
    h, w = bounded.shape
    meta = dict(window=img.window, resolution=(w, h),
                depth=int(img.provenance.get("depth", 0)))
    if bounded.all():
        return ConnectivityVerdict("undecided", "compact_components",
                                   note="entire window bounded; window too small",
                                   **meta)
    if not bounded.any():
        return ConnectivityVerdict("undecided", "compact_components",
                                   note="no bounded cells; window misses the slice",
                                   **meta)
    labels, count = ndimage.label(bounded, structure=np.ones((3, 3), dtype=int))
    sizes = ndimage.sum_labels(bounded, labels, range(1, count + 1))
    x0, y0, x1, y1 = img.window
    cw, ch = (x1 - x0) / w, (y1 - y0) / h
    boxes = []
    for idx, sl in enumerate(ndimage.find_objects(labels)):
        if sl is None or sizes[idx] < min_pixels:
            continue
        ry, rx = sl
        touches = (ry.start == 0 or rx.start == 0 or ry.stop == h or rx.stop == w)
        if not touches:
            boxes.append((x0 + rx.start * cw, y0 + ry.start * ch,
                          x0 + rx.stop * cw, y0 + ry.stop * ch))
    if boxes:
        boxes.sort(key=lambda b: -(b[2] - b[0]) * (b[3] - b[1]))
        return ConnectivityVerdict("unstably_disconnected", "compact_components",
                                   component_boxes=tuple(boxes), **meta)
    return ConnectivityVerdict("unstably_connected_at_resolution",
                               "compact_components", **meta)


_COMPONENT_DEPTHS = (64, 32, 16, 12, 8, 6, 4, 3, 2)


def component_verdict(
    params: HenonParams,
    lin: Linearization,
    resolution: int = 512,
    min_pixels: int = 8,
    window: Optional[tuple[float, float, float, float]] = None,
) -> ConnectivityVerdict:
    """Compact-component verdict over a fixed descending depth schedule.

    At strongly hyperbolic parameters the slice of the bounded set has
    measure zero, so evidence only shows up once the bounded-at-depth
    neighborhood is a few pixels thick; the first (deepest) depth that
    produces a decisive verdict wins.  Deterministic.
    """
    if window is None:
        r = 2.0 * params.filtration_radius
        window = (-r, -r, r, r)
    best_connected = None
    last = None
    for depth in _COMPONENT_DEPTHS:
        img = render_slice(params, lin, window, resolution, depth=depth)
        verdict = detect_compact_components(img, min_pixels=min_pixels)
        last = verdict
        if verdict.verdict == "unstably_disconnected":
            # interior evidence is meaningful at any depth (a compact
            # sublevel component must enclose bounded-set points)
            return verdict
        if verdict.verdict == "unstably_connected_at_resolution" \
                and best_connected is None and img.bounded_fraction() >= 0.01:
            # all-touching pictures only support connectivity once the
            # bands span whole pixels; shallow fat blobs do not count
            best_connected = verdict
    return best_connected if best_connected is not None else last


@dataclass(frozen=True)
class ConnectivityAssessment:
    """Both connectivity methods side by side plus the reconciled verdict.

    The methods must never contradict with opposite certainties; when they
    do (a bug by contract), the combined verdict degrades to undecided.
    """

    critical: ConnectivityVerdict
    components: ConnectivityVerdict
    combined: str

    def to_dict(self) -> dict:
        return {
            "combined": self.combined,
            "critical_points": self.critical.to_dict(),
            "compact_components": self.components.to_dict(),
        }


def unstable_connectivity(
    params: HenonParams,
    resolution: int = 512,
    grid: int = 96,
    depth: int = 1000,
) -> ConnectivityAssessment:
    """Run both connectivity probes on the default saddle and reconcile."""
    saddle = default_saddle(params)
    if saddle is None:
        missing = ConnectivityVerdict("undecided", "no_saddle",
                                      note="no saddle fixed point")
        return ConnectivityAssessment(missing, missing, "undecided")
    lin = linearize(params, saddle)
    r = 2.0 * params.filtration_radius
    crit = find_unstable_critical_points(
        params, lin, (-r, -r, r, r), depth=depth, grid=grid)
    certified = tuple(c for c in crit if c.certified)
    crit_verdict = ConnectivityVerdict(
        "unstably_disconnected" if certified else "unstably_connected_at_resolution",
        "critical_points", critical_points=tuple(crit),
        window=(-r, -r, r, r), resolution=(grid, grid), depth=depth)
    comp_verdict = component_verdict(params, lin, resolution=resolution)
    pair = {crit_verdict.verdict, comp_verdict.verdict}
    if pair == {"unstably_disconnected", "unstably_connected_at_resolution"}:
        combined = "undecided"  # opposite certainties: surface, never pick one
    elif "unstably_disconnected" in pair:
        combined = "unstably_disconnected"
    elif "unstably_connected_at_resolution" in pair:
        combined = "unstably_connected_at_resolution"
    else:
        combined = "undecided"
    return ConnectivityAssessment(crit_verdict, comp_verdict, combined)


def _leaf_green(params: HenonParams, lin: Linearization, z: complex,
                depth: int, tol: float) -> float:
    x, y = lin(complex(z))
    g = green_2d(params, Point2(complex(x), complex(y)), "plus",
                 tol=tol, max_iter=depth)
    return g.value


def _leaf_gradient(params: HenonParams, lin: Linearization, z: complex,
                   h: float, depth: int, tol: float) -> tuple[float, float]:
    gx = (_leaf_green(params, lin, z + h, depth, tol)
          - _leaf_green(params, lin, z - h, depth, tol)) / (2 * h)
    gy = (_leaf_green(params, lin, z + 1j * h, depth, tol)
          - _leaf_green(params, lin, z - 1j * h, depth, tol)) / (2 * h)
    return gx, gy


def leaf_laplacian(params: HenonParams, lin: Linearization, z: complex,
                   h: float = 1e-3, depth: int = 2000, tol: float = 1e-12) -> float:
    """Discrete Laplacian of g; vanishes to O(h^2) where g > 0 (harmonic)."""
    g0 = _leaf_green(params, lin, z, depth, tol)
    s = sum(_leaf_green(params, lin, z + d, depth, tol)
            for d in (h, -h, 1j * h, -1j * h))
    return (s - 4 * g0) / (h * h)


def find_unstable_critical_points(
    params: HenonParams,
    lin: Linearization,
    window: tuple[float, float, float, float] = (-10.0, -10.0, 10.0, 10.0),
    depth: int = 2000,
    grid: int = 96,
    green_threshold: float = 1e-4,
    gradient_threshold: float = 1e-6,
    green_tol: float = 1e-12,
    max_candidates: int = 12,
    descent_iters: int = 400,
) -> list[CriticalPointRecord]:
    """Locate critical points of g = G+ along the leaf inside the window.

    Grid pass: central-difference |grad g| at grid spacing, keeping local
    minima with g above the green threshold (critical points only mean
    something off the zero set).  Each candidate is refined by backtracking
    gradient descent on |grad g|^2; certification requires the refined point
    interior, g above threshold and |grad g| below the gradient threshold.
    An empty list is a valid (and meaningful) outcome.
    """
    x0, y0, x1, y1 = window
    z = _grid(window, grid, grid)
    X, Y = lin(z)
    g, _, _ = green_plus_batch(params, X, Y, depth, rate_tol=green_tol)
    cell = max((x1 - x0) / grid, (y1 - y0) / grid)
    dgdy, dgdx = np.gradient(g, (y1 - y0) / grid, (x1 - x0) / grid)
    mag = np.hypot(dgdx, dgdy)

    # local minima of |grad g| over the 8-neighborhood, interior, g > eps
    local_min = (mag == ndimage.minimum_filter(mag, size=3))
    local_min &= g > green_threshold
    local_min[:2, :] = local_min[-2:, :] = False
    local_min[:, :2] = local_min[:, -2:] = False
    cand_idx = np.argwhere(local_min)
    order = np.argsort(mag[local_min])
    candidates = [complex(z[i, j]) for (i, j) in cand_idx[order][:max_candidates]]

    h_fd = max(1e-7, 1e-3 * cell)
    found: list[CriticalPointRecord] = []
    for z0 in candidates:
        zc = z0
        lr = cell * cell
        gx0, gy0 = _leaf_gradient(params, lin, zc, h_fd, depth, green_tol)
        q = gx0 * gx0 + gy0 * gy0
        for _ in range(descent_iters):
            if math.sqrt(q) < gradient_threshold:
                break
            # numeric gradient of q via central differences
            hq = h_fd
            qq = {}
            for d in (hq, -hq, 1j * hq, -1j * hq):
                ax, ay = _leaf_gradient(params, lin, zc + d, h_fd, depth, green_tol)
                qq[d] = ax * ax + ay * ay
            dqx = (qq[hq] - qq[-hq]) / (2 * hq)
            dqy = (qq[1j * hq] - qq[-1j * hq]) / (2 * hq)
            step = complex(dqx, dqy)
            if step == 0:
                break
            moved = False
            for _ in range(25):
                zn = zc - lr * step
                ax, ay = _leaf_gradient(params, lin, zn, h_fd, depth, green_tol)
                qn = ax * ax + ay * ay
                if qn < q:
                    zc, q, gx0, gy0 = zn, qn, ax, ay
                    lr *= 1.5
                    moved = True
                    break
                lr *= 0.25
            if not moved:
                break
        gval = _leaf_green(params, lin, zc, depth, green_tol)
        gnorm = math.sqrt(q)
        interior = (x0 + cell < zc.real < x1 - cell and
                    y0 + cell < zc.imag < y1 - cell)
        certified = bool(gnorm < gradient_threshold and gval > green_threshold
                         and interior)
        if certified or gnorm < 10 * gradient_threshold:
            found.append(CriticalPointRecord(zc, gval, gnorm, certified))

    # dedupe refined points that collapsed together
    unique: list[CriticalPointRecord] = []
    for rec in sorted(found, key=lambda r: (not r.certified, r.gradient_norm)):
        if all(abs(rec.z - u.z) > 10 * cell * 1e-3 + 1e-9 for u in unique):
            unique.append(rec)
    return unique


def slice_summary(img: SliceImage,
                  critical_points: Sequence[CriticalPointRecord] = ()) -> dict:
    """JSON-ready summary of a slice: verdict, component boxes, criticals."""
    verdict = detect_compact_components(img)
    return {
        "kind": img.kind,
        "window": list(img.window),
        "resolution": [img.width, img.height],
        "depth": int(img.provenance.get("depth", 0)),
        "bounded_fraction": img.bounded_fraction(),
        "verdict": verdict.verdict,
        "component_boxes": [list(b) for b in verdict.component_boxes],
        "critical_points": [
            {"z_re": c.z.real, "z_im": c.z.imag, "green_value": c.green_value,
             "gradient_norm": c.gradient_norm, "certified": c.certified}
            for c in critical_points
        ],
    }


def _orbit_groups(sample: MeasureSample2D) -> dict[tuple[int, int], list]:
    groups: dict[tuple[int, int], list] = {}
    for r in sample.records:
        groups.setdefault((r.exact_period, r.orbit_id), []).append(r)
    return groups


def _exponent(sample: MeasureSample2D, which: str) -> ExponentEstimate:
    if len(sample) == 0:
        raise DomainError("sample must be nonempty")
    per_point = []
    orbit_means = []
    for (_, _), recs in _orbit_groups(sample).items():
        vals = []
        for r in recs:
            lam = r.lambda_u if which == "plus" else r.lambda_s
            vals.append(math.log(abs(lam)) / r.period)
        per_point.extend(vals)
        orbit_means.append(float(np.mean(vals)))
    value = float(np.mean(per_point))
    k = len(orbit_means)
    stderr = float(np.std(orbit_means, ddof=1) / math.sqrt(k)) if k > 1 else 0.0
    return ExponentEstimate(value, "saddle_average", stderr)


def estimate_lambda_plus(params: HenonParams, sample: MeasureSample2D) -> ExponentEstimate:
    """Unstable exponent of the empirical measure: mean of log|lambda_u|/n.

    Uniform weight per orbit point; the stderr is the orbit-level spread.
    """
    return _exponent(sample, "plus")


def estimate_lambda_minus(params: HenonParams, sample: MeasureSample2D) -> ExponentEstimate:
    return _exponent(sample, "minus")


# ---------------------------------------------------------------------------
# Parameter-plane rendering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamRegion:
    """Either a complex-a window at fixed b, or a real (a, b) rectangle."""

    kind: Literal["complex_a", "real_ab"]
    b: complex = 0.0
    re0: float = 0.0
    im0: float = 0.0
    re1: float = 0.0
    im1: float = 0.0
    a0: float = 0.0
    b0: float = 0.0
    a1: float = 0.0
    b1: float = 0.0


@dataclass(frozen=True)
class ProbeBudget:
    zgrid: int = 64
    depth: int = 200
    window_radius: float = 10.0
    descent_iters: int = 120
    max_candidates: int = 4
    cost_cap: float = 4e9
    wall_clock_seconds: Optional[float] = None  # None = run to completion


def _probe_connectivity(params: HenonParams, budget: ProbeBudget) -> tuple[int, float]:
    saddle = default_saddle(params)
    if saddle is None:
        return PARAM_UNDECIDED, 0.0
    try:
        lin = linearize(params, saddle)
    except DomainError:
        return PARAM_UNDECIDED, 0.0
    r = budget.window_radius
    recs = find_unstable_critical_points(
        params, lin, (-r, -r, r, r), depth=budget.depth, grid=budget.zgrid,
        max_candidates=budget.max_candidates, descent_iters=budget.descent_iters,
        green_tol=1e-12,
    )
    certified = [c for c in recs if c.certified]
    if certified:
        return PARAM_DISCONNECTED, max(c.green_value for c in certified)
    return PARAM_CONNECTED, 0.0


def _probe_escape_of_measure(params: HenonParams) -> tuple[int, float]:
    # 1D shadow probe: escape rate of the critical point of x -> a - x^2,
    # the classical connectedness-locus picture along the a-plane.
    from .dynamics import QuadParam

    g = green_1d(QuadParam(params.a), 0.0, tol=1e-9)
    if g.escaped_at is None:
        return PARAM_CONNECTED, 0.0
    return PARAM_DISCONNECTED, g.value


def _probe_horseshoe(params: HenonParams) -> tuple[int, float]:
    from .horseshoe import certify_horseshoe

    if params.a.imag != 0 or params.b.imag != 0:
        return PARAM_UNDECIDED, 0.0
    cert = certify_horseshoe(params.a.real, params.b.real)
    return (PARAM_DISCONNECTED if cert.verified else PARAM_CONNECTED,
            1.0 if cert.verified else 0.0)


def render_parameter_plane(
    region: ParamRegion,
    probe: Literal["connectivity", "horseshoe", "escape_of_measure"] = "connectivity",
    resolution: int | tuple[int, int] = 64,
    budget: Optional[ProbeBudget] = None,
    seed: int = 0,
) -> SliceImage:
    """Tri-state parameter-plane scan; cells that fail their probe stay undecided.

    The connectivity probe runs the critical-point search on the default
    saddle at coarse resolution; the horseshoe probe runs the interval
    certificate; escape_of_measure colors the 1D critical escape rate.
    A wall-clock budget, when set, marks the remaining cells undecided and
    flags the image partial instead of running long (and costs determinism
    across machines, so it is off by default).
    """
    import time as _time

    budget = budget or ProbeBudget()
    deadline = (None if budget.wall_clock_seconds is None
                else _time.monotonic() + budget.wall_clock_seconds)
    partial = False
    w, h = (resolution, resolution) if isinstance(resolution, int) else resolution
    if region.kind == "complex_a":
        if region.b == 0:
            raise DomainError("b must be nonzero")
        window = (region.re0, region.im0, region.re1, region.im1)
    elif region.kind == "real_ab":
        window = (region.a0, region.b0, region.a1, region.b1)
    else:
        raise DomainError(f"unknown region kind {region.kind!r}")
    if probe == "connectivity":
        cost = float(w) * h * budget.zgrid ** 2 * budget.depth
        if cost > budget.cost_cap:
            raise BudgetExceeded(
                f"estimated probe cost {cost:.2e} exceeds cap {budget.cost_cap:.2e}"
            )
    cells = _grid(window, w, h)
    rates = np.zeros((h, w), dtype=np.float32)
    status = np.full((h, w), PARAM_UNDECIDED, dtype=np.uint8)
    for i in range(h):
        for j in range(w):
            if deadline is not None and _time.monotonic() > deadline:
                partial = True
                break
            c = cells[i, j]
            if region.kind == "complex_a":
                a, b = complex(c), complex(region.b)
            else:
                a, b = complex(c.real), complex(c.imag)
            try:
                params = HenonParams(a, b)
            except DomainError:
                continue
            try:
                if probe == "connectivity":
                    code, rate = _probe_connectivity(params, budget)
                elif probe == "horseshoe":
                    code, rate = _probe_horseshoe(params)
                elif probe == "escape_of_measure":
                    code, rate = _probe_escape_of_measure(params)
                else:
                    raise DomainError(f"unknown probe {probe!r}")
            except DomainError:
                code, rate = PARAM_UNDECIDED, 0.0
            status[i, j] = code
            rates[i, j] = rate
        if partial:
            break
    prov = {
        "kind": "param",
        "partial": partial,
        "probe": probe,
        "region_kind": region.kind,
        "b_re": region.b.real if region.kind == "complex_a" else None,
        "b_im": region.b.imag if region.kind == "complex_a" else None,
        "zgrid": budget.zgrid,
        "depth": budget.depth,
        "window_radius": budget.window_radius,
        "seed": seed,
        "w": w, "h": h,
        "window": list(window),
    }
    return SliceImage(rates=rates, status=status, window=window, provenance=prov)
