"""Certified horseshoe detection, periodic-orbit census, boundary location.

All certificate inequalities run in outward-rounded interval arithmetic
implemented here (add/sub/mul/square/sqrt via next-representable rounding),
so a `verified = true` means every inequality holds with rigorous rounding,
portably.  "Not verified" is never a disproof.

The certificate combines three pieces over the box B = [-RB, RB]^2:

  1. strips: points of B staying in B one step satisfy x^2 in
     [a - (1+|b|)RB, a + (1+|b|)RB]; the two sign branches are disjoint
     exactly when the lower endpoint is positive, and the outward-rounded
     square roots (widened a hair) contain the true strips;
  2. crossing: the inner/outer strip edges map beyond the far/near box
     edges, so each strip crosses B fully in the unstable direction;
  3. cone expansion, both time directions: tangents with |dx| >= kappa|dy|
     satisfy |dx'| >= (2 min|x| - |b|/kappa)|dx|; a work queue of interval
     boxes tracks the cone ratio and growth product along branches until
     every branch certifies product >= lambda^steps with the cone closed
     up again, subdividing boxes and discarding pieces that leave the
     strips (those points are not in the invariant set).  The backward
     direction reuses the same engine on the Henon map conjugate to f^-1.

Together these give the standard crossed-mapping conclusion: the maximal
invariant set in B is hyperbolic and conjugate to the full 2-shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import BudgetExceeded, DomainError, HenonParams, inverse_conjugate
from .saddles import (
    Linearization,
    SearchBudget,
    find_periodic,
    fixed_points,
    linearize,
)

__all__ = [
    "Interval",
    "Box2",
    "HorseshoeConfig",
    "HorseshoeCertificate",
    "Certificate1D",
    "certify_horseshoe",
    "certify_horseshoe_1d",
    "CensusReport",
    "entropy_census",
    "BoundaryScanConfig",
    "BoundaryScanReport",
    "TangencyReport",
    "boundary_scan",
    "certificate_to_text",
    "certificate_from_text",
]

_INF = math.inf


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


@dataclass(frozen=True)
class Interval:
    """Closed interval with outward-rounded arithmetic."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(x, x)

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(_down(self.lo + other.lo), _up(self.hi + other.hi))

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(_down(self.lo - other.hi), _up(self.hi - other.lo))

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        cands = (self.lo * other.lo, self.lo * other.hi,
                 self.hi * other.lo, self.hi * other.hi)
        return Interval(_down(min(cands)), _up(max(cands)))

    def scale(self, c: float) -> "Interval":
        return self * Interval.point(c)

    def square(self) -> "Interval":
        if self.lo >= 0:
            return Interval(_down(self.lo * self.lo), _up(self.hi * self.hi))
        if self.hi <= 0:
            return Interval(_down(self.hi * self.hi), _up(self.lo * self.lo))
        m = max(-self.lo, self.hi)
        return Interval(0.0, _up(m * m))

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise DomainError("sqrt of an interval reaching below zero")
        return Interval(_down(math.sqrt(self.lo)), _up(math.sqrt(self.hi)))

    def abs(self) -> "Interval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def split(self) -> tuple["Interval", "Interval"]:
        m = self.mid
        return Interval(self.lo, m), Interval(m, self.hi)


@dataclass(frozen=True)
class Box2:
    """Axis-aligned interval box in R^2."""

    x: Interval
    y: Interval


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HorseshoeConfig:
    lambda_min: float = 1.02
    depth_cap: int = 40
    queue_cap: int = 40_000
    split_fraction: float = 0.25  # split boxes wider than this times strip width
    kappa: Optional[float] = None  # None = derive from the one-step balance


@dataclass(frozen=True)
class ConeReport:
    kappa0: float
    certified: bool
    max_depth_used: int
    boxes_processed: int
    min_product_slack: float
    failure: str = ""


@dataclass(frozen=True)
class HorseshoeCertificate:
    """Verification record; verified only if every inequality held."""

    a: float
    b: float
    box_radius: float
    strip: Optional[Interval]  # |x| range of the strips (widened outward)
    crossing_inner: Optional[Interval]  # image x-range of the inner edges
    crossing_outer: Optional[Interval]  # image x-range of the outer edges
    forward: Optional[ConeReport]
    backward: Optional[ConeReport]
    verified: bool
    failure: str = ""


def _strip_data(a: float, b: float) -> tuple[float, Optional[Interval], str]:
    """Box radius and widened strip |x|-range, or a failure reason."""
    av, bv = Interval.point(a), Interval.point(b)
    am, bm = av.abs(), bv.abs()
    one = Interval.point(1.0)
    disc = ((one + bm).square() + am.scale(4.0)).sqrt()
    R = (one + bm + disc).scale(0.5)
    RB = _up(max(2.0, R.hi) * (1.0 + 1e-6))
    rb = Interval.point(RB)
    lo_sq = av - (one + bm) * rb
    hi_sq = av + (one + bm) * rb
    if lo_sq.lo <= 0.0:
        return RB, None, "strips do not separate: a - (1+|b|)RB <= 0"
    u = Interval(_down(lo_sq.sqrt().lo * (1.0 - 1e-12)),
                 _up(hi_sq.sqrt().hi * (1.0 + 1e-12)))
    if u.hi >= RB:
        return RB, None, "strip containment failed: u_out >= RB"
    return RB, u, ""


def _crossing(a: float, b: float, RB: float, u: Interval) -> tuple[Interval, Interval, str]:
    """Images of the strip edges across the box; both must clear the far edges."""
    av, bv = Interval.point(a), Interval.point(b)
    y_range = Interval(-RB, RB)
    inner = av - bv * y_range - Interval.point(u.lo).square()
    outer = av - bv * y_range - Interval.point(u.hi).square()
    if not inner.lo >= RB:
        return inner, outer, "inner strip edge does not cross beyond +RB"
    if not outer.hi <= -RB:
        return inner, outer, "outer strip edge does not cross beyond -RB"
    return inner, outer, ""


def _auto_kappa(u_lo: float, b_abs: float) -> float:
    disc = u_lo * u_lo - b_abs
    if disc > 0:
        return u_lo + math.sqrt(disc)
    return max(1.0, math.sqrt(b_abs))


def _cone_expansion(a: float, b: float, RB: float, u: Interval,
                    config: HorseshoeConfig) -> ConeReport:
    """Verify uniform cone expansion over all branches by interval search.

    Queue items carry (box, cone ratio lower bound, log growth, steps).
    A branch certifies once growth >= lambda_min^steps with the cone ratio
    back above kappa0; pieces leaving box or strips are not invariant and
    drop.  Returns certified = False with the first obstruction otherwise.
    """
    kappa0 = config.kappa if config.kappa is not None else _auto_kappa(u.lo, abs(b))
    av, bv = Interval.point(a), Interval.point(b)
    bm = abs(b)
    log_lam = math.log(config.lambda_min)
    strips = (u, -u)
    w_split = max(u.width * config.split_fraction, 1e-12)

    queue: list[tuple[Box2, float, float, int]] = []
    for sx in strips:
        for sy in strips:
            queue.append((Box2(sx, sy), kappa0, 0.0, 0))
    processed = 0
    max_depth = 0
    min_slack = _INF
    while queue:
        if len(queue) > config.queue_cap:
            return ConeReport(kappa0, False, max_depth, processed, min_slack,
                              f"queue cap {config.queue_cap} exceeded")
        box, kappa, logp, steps = queue.pop()
        processed += 1
        max_depth = max(max_depth, steps)
        if box.x.width > w_split:
            la, lb = box.x.split()
            queue.append((Box2(la, box.y), kappa, logp, steps))
            queue.append((Box2(lb, box.y), kappa, logp, steps))
            continue
        if steps >= config.depth_cap:
            return ConeReport(kappa0, False, max_depth, processed, min_slack,
                              f"depth cap {config.depth_cap} reached with "
                              f"growth slack {logp - steps * log_lam:.3f}")
        min_ax = box.x.abs().lo
        gamma = _down(2.0 * min_ax - bm / kappa)
        if gamma <= 0.0:
            return ConeReport(kappa0, False, max_depth, processed, min_slack,
                              f"cone control lost at |x| >= {min_ax:.6g}, "
                              f"kappa {kappa:.6g}")
        logp2 = logp + math.log(gamma)
        steps2 = steps + 1
        if logp2 >= steps2 * log_lam and gamma >= kappa0:
            min_slack = min(min_slack, logp2 - steps2 * log_lam)
            continue
        ix = av - bv * box.y - box.x.square()
        iy = box.x
        ix = ix.intersect(Interval(-RB, RB))
        if ix is None:
            continue
        for s in strips:
            piece = ix.intersect(s)
            if piece is not None:
                queue.append((Box2(piece, iy), gamma, logp2, steps2))
    if min_slack is _INF:
        min_slack = 0.0
    return ConeReport(kappa0, True, max_depth, processed, min_slack)


def certify_horseshoe(a: float, b: float,
                      config: Optional[HorseshoeConfig] = None) -> HorseshoeCertificate:
    """Interval-verified horseshoe test for the real map at (a, b).

    verified = True implies the nonwandering set in the box is conjugate to
    the full 2-shift (strip crossing plus two-sided cone hyperbolicity,
    every inequality outward-rounded).  verified = False records the first
    failed inequality and is not a disproof.
    """
    if b == 0:
        raise DomainError("b must be nonzero")
    if isinstance(a, complex) or isinstance(b, complex):
        raise DomainError("certificates cover real parameters only")
    config = config or HorseshoeConfig()
    RB, u, fail = _strip_data(a, b)
    if fail:
        return HorseshoeCertificate(a, b, RB, None, None, None, None, None,
                                    False, fail)
    inner, outer, fail = _crossing(a, b, RB, u)
    if fail:
        return HorseshoeCertificate(a, b, RB, u, inner, outer, None, None,
                                    False, fail)
    fwd = _cone_expansion(a, b, RB, u, config)
    if not fwd.certified:
        return HorseshoeCertificate(a, b, RB, u, inner, outer, fwd, None,
                                    False, f"forward cones: {fwd.failure}")
    g = inverse_conjugate(HenonParams(a, b))
    ga, gb = g.a.real, g.b.real
    RBg, ug, failg = _strip_data(ga, gb)
    if failg:
        return HorseshoeCertificate(a, b, RB, u, inner, outer, fwd, None,
                                    False, f"backward strips: {failg}")
    bwd = _cone_expansion(ga, gb, RBg, ug, config)
    if not bwd.certified:
        return HorseshoeCertificate(a, b, RB, u, inner, outer, fwd, bwd,
                                    False, f"backward cones: {bwd.failure}")
    return HorseshoeCertificate(a, b, RB, u, inner, outer, fwd, bwd, True)


@dataclass(frozen=True)
class Certificate1D:
    a: float
    box_radius: float
    strip: Optional[Interval]
    verified: bool
    max_depth_used: int = 0
    failure: str = ""


def certify_horseshoe_1d(a: float, config: Optional[HorseshoeConfig] = None) -> Certificate1D:
    """Strip/expansion certificate for x -> a - x**2 on [-beta, beta].

    beta is the positive fixed point; strips exist iff a - beta > 0, whose
    exact boundary is a = 2, and branchwise interval products certify
    uniform expansion of an iterate (the y-free limit of the 2D logic).
    """
    config = config or HorseshoeConfig()
    av = Interval.point(float(a))
    one = Interval.point(1.0)
    beta = (one + (one + av.scale(4.0)).sqrt()).scale(0.5)
    B = _up(beta.hi * (1.0 + 1e-6))
    lo_sq = av - Interval.point(B)
    hi_sq = av + Interval.point(B)
    if lo_sq.lo <= 0.0:
        return Certificate1D(a, B, None, False, 0, "strips do not separate: a - beta <= 0")
    u = Interval(_down(lo_sq.sqrt().lo * (1.0 - 1e-12)),
                 _up(hi_sq.sqrt().hi * (1.0 + 1e-12)))
    if u.hi >= B:
        return Certificate1D(a, B, u, False, 0, "strip containment failed")
    log_lam = math.log(config.lambda_min)
    w_split = max(u.width * config.split_fraction, 1e-12)
    strips = (u, -u)
    queue = [(s, 0.0, 0) for s in strips]
    max_depth = 0
    while queue:
        if len(queue) > config.queue_cap:
            return Certificate1D(a, B, u, False, max_depth, "queue cap exceeded")
        iv, logp, steps = queue.pop()
        max_depth = max(max_depth, steps)
        if iv.width > w_split:
            p1, p2 = iv.split()
            queue.append((p1, logp, steps))
            queue.append((p2, logp, steps))
            continue
        if steps >= config.depth_cap:
            return Certificate1D(a, B, u, False, max_depth,
                                 f"depth cap reached (slack {logp - steps * log_lam:.3f})")
        gamma = _down(2.0 * iv.abs().lo)
        if gamma <= 0.0:
            return Certificate1D(a, B, u, False, max_depth, "derivative reaches zero")
        logp2 = logp + math.log(gamma)
        steps2 = steps + 1
        if logp2 >= steps2 * log_lam:
            continue
        img = av - iv.square()
        img = img.intersect(Interval(-B, B))
        if img is None:
            continue
        for s in strips:
            piece = img.intersect(s)
            if piece is not None:
                queue.append((piece, logp2, steps2))
    return Certificate1D(a, B, u, True, max_depth)


# ---------------------------------------------------------------------------
# Census
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CensusRow:
    n: int
    complex_count: int
    real_count: int
    expected: int
    undercount_warning: bool

    @property
    def growth_rate(self) -> float:
        return math.log(self.real_count) / self.n if self.real_count > 0 else -_INF


@dataclass(frozen=True)
class CensusReport:
    a: float
    b: float
    rows: tuple[CensusRow, ...]
    consistent_with_maximal_entropy: bool
    note: str = ("maximal-entropy verdict is an empirical proxy: periodic "
                 "points are counted, not entropy itself")

    def to_dict(self) -> dict:
        return {
            "a": self.a, "b": self.b,
            "rows": [{"n": r.n, "complex": r.complex_count, "real": r.real_count,
                      "expected": r.expected, "undercount": r.undercount_warning,
                      "growth_rate": r.growth_rate} for r in self.rows],
            "consistent_with_maximal_entropy": self.consistent_with_maximal_entropy,
            "note": self.note,
        }


def entropy_census(a: float, b: float, n_max: int = 6,
                   budget: Optional[SearchBudget] = None,
                   seed: int = 0) -> CensusReport:
    """Count fixed points of f^n over C^2 and R^2 for n <= n_max.

    The maximal-entropy verdict is "consistent" iff every computed n has
    real count = complex count = 2^n, a periodic-point proxy justified by
    density of saddles in the chaotic locus.
    """
    if n_max < 1 or n_max > 10:
        raise DomainError("n_max must be in [1, 10]")
    params = HenonParams(float(a), float(b))
    rows = []
    consistent = True
    for n in range(1, n_max + 1):
        recs = find_periodic(params, n, "complex_grid", budget, seed)
        ccount = len(recs)
        rcount = sum(1 for r in recs if r.is_real)
        expected = 1 << n
        under = ccount < expected
        if not (ccount == expected and rcount == expected):
            consistent = False
        rows.append(CensusRow(n, ccount, rcount, expected, under))
    return CensusReport(float(a), float(b), tuple(rows), consistent)


# ---------------------------------------------------------------------------
# Boundary scan and tangency evidence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryScanConfig:
    n_census: int = 6
    max_steps: int = 20
    target_width: float = 0.02
    cert_config: HorseshoeConfig = field(default_factory=HorseshoeConfig)
    fit_window: float = 0.35
    seed: int = 0
    wall_clock_seconds: Optional[float] = None  # None = run to completion


@dataclass(frozen=True)
class TangencyReport:
    """Closest-approach data between a stable and an unstable manifold.

    The local graph of the unstable curve over the stable tangent line is
    fitted by a quadratic; a tangency announces itself by a negligible
    linear coefficient with a solid quadratic one.
    """

    a: float
    b: float
    p_label: str
    q_label: str
    p_equals_q: bool
    p_location: tuple[float, float]
    q_location: tuple[float, float]
    tangency_location: tuple[float, float]
    distance: float
    tangent_angle_deg: float
    fit_c0: float
    fit_c1: float
    fit_c2: float
    fit_residual_rms: float
    fit_window: float
    approach_samples: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "a", "b", "p_label", "q_label", "p_equals_q", "p_location",
            "q_location", "tangency_location", "distance", "tangent_angle_deg",
            "fit_c0", "fit_c1", "fit_c2", "fit_residual_rms", "fit_window",
        )}


@dataclass(frozen=True)
class BoundaryScanReport:
    b: float
    bracket: tuple[float, float]
    steps: tuple[tuple[float, str], ...]  # midpoint, which predicate fired
    gap_stalled: bool
    tangency: Optional[TangencyReport]
    # census at the final bracket midpoint: near the locus boundary the real
    # counts may drop below 2^n by the deficit of the identified orbit pair;
    # reported as observed, never asserted
    midpoint_census: tuple[tuple[int, int, int], ...] = ()  # (n, real, expected)
    budget_exhausted: bool = False

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "bracket": list(self.bracket),
            "midpoint": 0.5 * (self.bracket[0] + self.bracket[1]),
            "steps": [list(s) for s in self.steps],
            "gap_stalled": self.gap_stalled,
            "budget_exhausted": self.budget_exhausted,
            "midpoint_census": [list(r) for r in self.midpoint_census],
            "tangency": self.tangency.to_dict() if self.tangency else None,
        }


def _census_fails(a: float, b: float, n_max: int, seed: int) -> bool:
    report = entropy_census(a, b, n_max=n_max, seed=seed)
    return any(r.real_count < r.expected for r in report.rows)


def _real_curve(lin: Linearization, clip: float, arc_log: float = 8.0,
                density: float = 4000.0) -> np.ndarray:
    """Sample the real trace of the manifold, clipped to |.|_sup <= clip.

    Parameters are sampled log-uniformly over multiplier annuli out to
    |t| ~ e^arc_log, which covers a fixed number of box transits whatever
    the multiplier size (stable multipliers can be huge).  Returns an
    (m, 3) array of rows (t, x, y) sorted by parameter.
    """
    lam = abs(lin.multiplier)
    loglam = math.log(lam)
    annuli = max(2, math.ceil(arc_log / loglam))
    per = min(20000, max(2000, int(density * loglam)))
    chunks = [np.linspace(-1.0, 1.0, 512)]
    for m in range(annuli):
        grid = np.exp(np.linspace(m * loglam, (m + 1) * loglam, per))
        chunks += [grid, -grid]
    ts = np.unique(np.concatenate(chunks))
    X, Y = lin(ts.astype(np.complex128))
    keep = (np.maximum(np.abs(X.real), np.abs(Y.real)) <= clip)
    keep &= np.maximum(np.abs(X.imag), np.abs(Y.imag)) <= 1e-6
    keep &= np.isfinite(X) & np.isfinite(Y)
    return np.stack([ts[keep], X.real[keep], Y.real[keep]], axis=1)


def _tangent(curve: np.ndarray, i: int) -> np.ndarray:
    j0, j1 = max(0, i - 1), min(curve.shape[0] - 1, i + 1)
    v = curve[j1, 1:] - curve[j0, 1:]
    n = np.linalg.norm(v)
    return v / n if n > 0 else np.array([1.0, 0.0])


def _tangent_array(curve: np.ndarray) -> np.ndarray:
    d = np.gradient(curve[:, 1:], axis=0)
    n = np.linalg.norm(d, axis=1, keepdims=True)
    return d / np.maximum(n, 1e-300)


def _best_tangential_approach(cu: np.ndarray, cs: np.ndarray,
                              exclude_radius: float,
                              anchor: tuple[float, float],
                              dist_scale: float) -> tuple[int, int, float, float]:
    """Pair (iu, js) minimizing angle + distance, skipping the anchor zone.

    Transversal crossings reach distance zero but at a visible angle; the
    fold near a tangency is the closest approach with nearly parallel
    tangents, so the score mixes both.
    """
    ax, ay = anchor
    du = np.hypot(cu[:, 1] - ax, cu[:, 2] - ay)
    iu_ok = du > exclude_radius
    if not iu_ok.any() or cs.shape[0] == 0:
        return -1, -1, _INF, _INF
    tu = _tangent_array(cu)
    ts = _tangent_array(cs)
    best = (_INF, -1, -1, _INF, _INF)
    chunk = 1024
    for i0 in range(0, cu.shape[0], chunk):
        sel = np.arange(i0, min(i0 + chunk, cu.shape[0]))
        sel = sel[iu_ok[sel]]
        if sel.size == 0:
            continue
        u = cu[sel]
        d2 = (u[:, None, 1] - cs[None, :, 1]) ** 2 + (u[:, None, 2] - cs[None, :, 2]) ** 2
        js = np.argmin(d2, axis=1)
        dist = np.sqrt(d2[np.arange(sel.size), js])
        cosang = np.abs(np.sum(tu[sel] * ts[js], axis=1))
        ang = np.degrees(np.arccos(np.minimum(1.0, cosang)))
        score = ang + (90.0 / dist_scale) * dist
        k = int(np.argmin(score))
        if score[k] < best[0]:
            best = (float(score[k]), int(sel[k]), int(js[k]),
                    float(dist[k]), float(ang[k]))
    return best[1], best[2], best[3], best[4]


def _refine_curve_near(lin: Linearization, curve: np.ndarray, idx: int,
                       window: float, count: int = 4001) -> np.ndarray:
    """Resample the curve linearly in t around sample idx.

    The t-span is sized from the local speed |dphi/dt| so the resample
    covers about 1.5 fit windows of arclength on each side.
    """
    i0, i1 = max(0, idx - 1), min(curve.shape[0] - 1, idx + 1)
    dt = max(abs(curve[i1, 0] - curve[i0, 0]), 1e-12)
    dx = float(np.hypot(curve[i1, 1] - curve[i0, 1], curve[i1, 2] - curve[i0, 2]))
    speed = max(dx / dt, 1e-9)
    spread = 1.5 * window / speed
    ts = curve[idx, 0] + np.linspace(-spread, spread, count)
    X, Y = lin(ts.astype(np.complex128))
    keep = np.maximum(np.abs(X.imag), np.abs(Y.imag)) <= 1e-6
    keep &= np.isfinite(X) & np.isfinite(Y)
    return np.stack([ts[keep], X.real[keep], Y.real[keep]], axis=1)


def _local_segment(curve: np.ndarray, center: int, m: np.ndarray,
                   e1: np.ndarray, window: float, cap: int = 600) -> np.ndarray:
    """Contiguous piece of the curve around `center` within the fit window.

    Walking outward index by index keeps other branches of the same
    manifold (which also enter the window) out of the fit.
    """
    lo = hi = center
    def inside(i: int) -> bool:
        return abs(float((curve[i, 1:] - m) @ e1)) <= 1.2 * window
    while lo > 0 and center - lo < cap and inside(lo - 1):
        lo -= 1
    while hi < curve.shape[0] - 1 and hi - center < cap and inside(hi + 1):
        hi += 1
    return curve[lo:hi + 1]


def _fit_quadratic_graph(cu: np.ndarray, cs: np.ndarray, iu: int, js: int,
                         window: float) -> tuple[float, float, float, float, float]:
    """Fit the unstable curve minus the stable curve over the stable tangent.

    Both local curve segments are projected on (e1, e2) centered at the
    stable closest point; each is fitted as a quadratic graph eta(xi) and
    the coefficients are differenced, which removes the stable curve's own
    curvature.  Returns (c0, c1, c2, residual_rms, angle_deg).
    """
    m = cs[js, 1:]
    e1 = _tangent(cs, js)
    e2 = np.array([-e1[1], e1[0]])
    tu = _tangent(cu, iu)
    cosang = abs(float(np.dot(e1, tu)))
    angle = math.degrees(math.acos(min(1.0, cosang)))

    fits = []
    residuals = []
    for curve, center in ((cu, iu), (cs, js)):
        seg = _local_segment(curve, center, m, e1, window)
        d = seg[:, 1:] - m
        xi, eta = d @ e1, d @ e2
        sel = np.abs(xi) <= window
        if np.count_nonzero(sel) < 8:
            return math.nan, math.nan, math.nan, math.nan, angle
        coef = np.polynomial.polynomial.polyfit(xi[sel], eta[sel], 2)
        resid = eta[sel] - np.polynomial.polynomial.polyval(xi[sel], coef)
        fits.append(coef)
        residuals.append(float(np.sqrt(np.mean(resid ** 2))))
    c = fits[0] - fits[1]
    rms = float(math.hypot(*residuals))
    return float(c[0]), float(c[1]), float(c[2]), rms, angle


def find_tangency(a: float, b: float,
                  config: Optional[BoundaryScanConfig] = None) -> TangencyReport:
    """Locate the near-tangency of stable/unstable manifolds of fixed points.

    The fixed-point pair follows the sign of b (same point for b > 0,
    distinct points for b < 0); among admissible pairs the one whose curves
    approach most tangentially wins.
    """
    config = config or BoundaryScanConfig()
    params = HenonParams(float(a), float(b))
    fps = [r for r in fixed_points(params) if r.is_saddle and r.is_real]
    if len(fps) < (1 if b > 0 else 2):
        raise DomainError("need real saddle fixed points for tangency evidence")
    labels = [f"fp{i}" for i in range(len(fps))]
    if b > 0:
        pairs = [(i, i) for i in range(len(fps))]
    else:
        pairs = [(i, j) for i in range(len(fps)) for j in range(len(fps)) if i != j]
    clip = 3.0 * params.filtration_radius
    best = None
    for (ip, iq) in pairs:
        p, q = fps[ip], fps[iq]
        lin_u = linearize(params, q, direction="forward")
        lin_s = linearize(params, p, direction="backward")
        cu = _real_curve(lin_u, clip)
        cs = _real_curve(lin_s, clip)
        if cu.shape[0] < 16 or cs.shape[0] < 16:
            continue
        exclude = 0.05 * params.filtration_radius if ip == iq else 0.0
        anchor = (p.location.x.real, p.location.y.real)
        iu, js, dist, angle0 = _best_tangential_approach(
            cu, cs, exclude, anchor, params.filtration_radius)
        if iu < 0:
            continue
        # resample both curves finely around the approach before fitting
        cu2 = _refine_curve_near(lin_u, cu, iu, config.fit_window)
        cs2 = _refine_curve_near(lin_s, cs, js, config.fit_window)
        if cu2.shape[0] < 16 or cs2.shape[0] < 16:
            continue
        iu2, js2, dist, angle0 = _best_tangential_approach(
            cu2, cs2, 0.0, anchor, params.filtration_radius)
        if iu2 < 0:
            continue
        c0, c1, c2, rms, angle = _fit_quadratic_graph(cu2, cs2, iu2, js2,
                                                      config.fit_window)
        cu, cs, iu, js = cu2, cs2, iu2, js2
        score = angle0 + (90.0 / params.filtration_radius) * dist
        loc = (0.5 * (cu[iu, 1] + cs[js, 1]), 0.5 * (cu[iu, 2] + cs[js, 2]))
        samples = tuple(
            (float(cu[k, 0]), float(np.hypot(cu[k, 1] - cs[js, 1], cu[k, 2] - cs[js, 2])))
            for k in range(max(0, iu - 20), min(cu.shape[0], iu + 21), 2)
        )
        rep = TangencyReport(
            a=float(a), b=float(b), p_label=labels[ip], q_label=labels[iq],
            p_equals_q=(ip == iq),
            p_location=(p.location.x.real, p.location.y.real),
            q_location=(q.location.x.real, q.location.y.real),
            tangency_location=loc, distance=dist, tangent_angle_deg=angle,
            fit_c0=c0, fit_c1=c1, fit_c2=c2, fit_residual_rms=rms,
            fit_window=config.fit_window, approach_samples=samples,
        )
        if best is None or score < best[0]:
            best = (score, rep)
    if best is None:
        raise DomainError("no admissible manifold pair produced curves")
    return best[1]


def boundary_scan(b: float, a_bracket: tuple[float, float],
                  config: Optional[BoundaryScanConfig] = None) -> BoundaryScanReport:
    """Bisect the horseshoe-locus boundary in a at fixed b.

    Upper predicate: the interval certificate verifies.  Lower predicate:
    the real period-n census drops below 2^n for some n <= n_census (a
    certificate failure alone is not a disproof).  If neither predicate
    fires at a midpoint the scan stops with the bracket it has (the
    certificate/census gap), recorded rather than guessed through.  Both
    predicates firing at once is contradictory and aborts.
    """
    import time as _time

    config = config or BoundaryScanConfig()
    deadline = (None if config.wall_clock_seconds is None
                else _time.monotonic() + config.wall_clock_seconds)
    a_lo, a_hi = float(a_bracket[0]), float(a_bracket[1])
    if not certify_horseshoe(a_hi, b, config.cert_config).verified:
        raise DomainError(f"bracket top a={a_hi} is not certificate-verified")
    if not _census_fails(a_lo, b, config.n_census, config.seed):
        raise DomainError(f"bracket bottom a={a_lo} is not falsified by census")
    steps: list[tuple[float, str]] = []
    gap = False
    exhausted = False
    for _ in range(config.max_steps):
        if a_hi - a_lo <= config.target_width:
            break
        if deadline is not None and _time.monotonic() > deadline:
            exhausted = True
            break
        mid = 0.5 * (a_lo + a_hi)
        cert_ok = certify_horseshoe(mid, b, config.cert_config).verified
        census_bad = _census_fails(mid, b, config.n_census, config.seed)
        if cert_ok and census_bad:
            raise BudgetExceeded(
                f"predicates contradict at a={mid}: certificate verified while "
                "census is inconsistent; configuration too coarse")
        if cert_ok:
            a_hi = mid
            steps.append((mid, "certificate"))
        elif census_bad:
            a_lo = mid
            steps.append((mid, "census"))
        else:
            steps.append((mid, "gap"))
            gap = True
            break
    mid_rep = entropy_census(0.5 * (a_lo + a_hi), b, config.n_census,
                             seed=config.seed)
    midpoint_census = tuple((r.n, r.real_count, r.expected) for r in mid_rep.rows)
    tangency = find_tangency(a_hi, b, config)
    return BoundaryScanReport(float(b), (a_lo, a_hi), tuple(steps), gap,
                              tangency, midpoint_census, exhausted)


# ---------------------------------------------------------------------------
# Serialization: human-readable with exact hex endpoints
# ---------------------------------------------------------------------------


def _hex_pair(iv: Optional[Interval]) -> str:
    if iv is None:
        return "none"
    return f"[{iv.lo.hex()} {iv.hi.hex()}] (~[{iv.lo:.9g} {iv.hi:.9g}])"


def _cone_text(name: str, rep: Optional[ConeReport]) -> list[str]:
    if rep is None:
        return [f"{name}: skipped"]
    return [
        f"{name}: certified={str(rep.certified).lower()} kappa0={rep.kappa0.hex()}"
        f" depth={rep.max_depth_used} boxes={rep.boxes_processed}"
        f" slack={rep.min_product_slack:.6g}"
        + (f" failure={rep.failure!r}" if rep.failure else "")
    ]


def certificate_to_text(cert: HorseshoeCertificate) -> str:
    lines = [
        "henonlab horseshoe certificate v1",
        f"a: {float(cert.a).hex()} (~{cert.a:.9g})",
        f"b: {float(cert.b).hex()} (~{cert.b:.9g})",
        f"box_radius: {float(cert.box_radius).hex()} (~{cert.box_radius:.9g})",
        f"strip_abs_x: {_hex_pair(cert.strip)}",
        f"inner_edge_image_x: {_hex_pair(cert.crossing_inner)}",
        f"outer_edge_image_x: {_hex_pair(cert.crossing_outer)}",
        *_cone_text("forward_cones", cert.forward),
        *_cone_text("backward_cones", cert.backward),
        f"verified: {str(cert.verified).lower()}",
    ]
    if cert.failure:
        lines.append(f"failure: {cert.failure}")
    return "\n".join(lines) + "\n"


def boundary_report_to_text(rep: BoundaryScanReport) -> str:
    lo, hi = rep.bracket
    lines = [
        "henonlab boundary scan report v1",
        f"b: {float(rep.b).hex()} (~{rep.b:.9g})",
        f"bracket_lo: {lo.hex()} (~{lo:.9g})",
        f"bracket_hi: {hi.hex()} (~{hi:.9g})",
        f"gap_stalled: {str(rep.gap_stalled).lower()}",
        f"budget_exhausted: {str(rep.budget_exhausted).lower()}",
        "midpoint_census: " + " ".join(
            f"{n}:{real}/{expected}" for n, real, expected in rep.midpoint_census),
    ]
    t = rep.tangency
    if t is not None:
        lines += [
            f"tangency_pair: p={t.p_label} q={t.q_label} same={str(t.p_equals_q).lower()}",
            f"tangency_location: {t.tangency_location[0].hex()} {t.tangency_location[1].hex()}",
            f"fit_c0: {t.fit_c0.hex()} (~{t.fit_c0:.6g})",
            f"fit_c1: {t.fit_c1.hex()} (~{t.fit_c1:.6g})",
            f"fit_c2: {t.fit_c2.hex()} (~{t.fit_c2:.6g})",
            f"fit_residual_rms: {t.fit_residual_rms.hex()} (~{t.fit_residual_rms:.6g})",
        ]
    return "\n".join(lines) + "\n"


def certificate_from_text(text: str) -> dict:
    """Parse the bit-exact fields back (for replay checks)."""
    out: dict = {}
    for line in text.strip().splitlines()[1:]:
        key, _, rest = line.partition(":")
        rest = rest.strip()
        key = key.strip()
        if key in ("a", "b", "box_radius"):
            out[key] = float.fromhex(rest.split()[0])
        elif key in ("strip_abs_x", "inner_edge_image_x", "outer_edge_image_x"):
            if rest == "none":
                out[key] = None
            else:
                lo, hi = rest.split("]")[0].strip("[").split()
                out[key] = Interval(float.fromhex(lo), float.fromhex(hi))
        elif key == "verified":
            out[key] = rest == "true"
        elif key == "failure":
            out[key] = rest
    return out
