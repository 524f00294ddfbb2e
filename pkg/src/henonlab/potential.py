"""Forward/backward escape-rate potentials on C^2 and periodic-point sampling.

The potentials G+ and G- extend the 1D construction: once the filtration
certifies escape the sup-norm is carried by the expanding coordinate and

    M_{k+1} = M_k^2 * |1 + delta_k|,     |delta_k| <= (|a| + |b| M_k) / M_k^2

for the forward orbit, so telescoping 2^-k log M_k gives a certified tail
bound exactly as in one variable.  Backward orbits pick up a constant
1/|b| per squaring; its geometric sum is exact and folded into the returned
value, leaving the same certified remainder.

The equilibrium measure is represented empirically: the cloud of saddle
periodic points up to a feasible period, uniformly weighted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .dynamics import (CERT_MARGIN, CYCLE_TOL, DomainError, HenonParams,
                       Point2, henon_step, henon_step_back)
from .quadratic import GreenValue
from .saddles import SaddleRecord, SearchBudget, find_periodic

__all__ = [
    "GreenPairValue",
    "MeasureSample2D",
    "green_2d",
    "green_pair",
    "green_plus_batch",
    "sample_mu",
]

_GREEN2D_MAX_ITER = 8192


def green_2d(
    params: HenonParams,
    p: Point2,
    sign: Literal["plus", "minus"] = "plus",
    tol: float = 1e-10,
    max_iter: int = _GREEN2D_MAX_ITER,
) -> GreenValue:
    """Escape-rate potential of the forward (plus) or backward (minus) orbit.

    Contract as in the 1D case: on certified escape the value carries an
    error bound <= tol; without a certificate within the budget the point is
    flagged assumed-in-K+ (resp. K-) with value exactly 0.

    Inputs that shadow a periodic orbit need care: iterating a saddle
    rounded to doubles drifts along the unstable direction and eventually
    escapes for real, yet the intended point has value 0.  If the orbit
    returns within 1e-10 of its start before any certificate fires, the
    point is reported bounded (assumed-in-K), which is the honest verdict
    for the shadowed orbit rather than for its rounding.
    """
    if tol < 1e-12:
        raise DomainError("tol must be >= 1e-12")
    if sign not in ("plus", "minus"):
        raise DomainError(f"unknown sign {sign!r}")
    forward = sign == "plus"
    a_m = abs(params.a)
    b_m = abs(params.b)
    radius = params.filtration_radius
    log_b = math.log(b_m)
    step = henon_step if forward else henon_step_back
    x, y = p.x, p.y
    x0, y0 = x, y
    escaped_at: Optional[int] = None
    n = 0
    while n <= max_iter:
        if escaped_at is None and n > 0 \
                and max(abs(x - x0), abs(y - y0)) <= CYCLE_TOL:
            return GreenValue(0.0, 0.0, None, n, assumed_in_k=True)
        ax, ay = abs(x), abs(y)
        edge = radius * (1.0 + CERT_MARGIN)
        if forward:
            certified, m = (ax > edge and ax >= ay), ax
        else:
            certified, m = (ay > edge and ay >= ax), ay
        if escaped_at is None and certified:
            escaped_at = n
        if escaped_at is not None:
            t = (a_m + (b_m * m if forward else m)) / (m * m)
            if t < 1.0:
                bound = (2.0 ** -n) * (-math.log1p(-t))
                if bound <= tol or m > 1e60:
                    value = (2.0 ** -n) * (math.log(m) - (0.0 if forward else log_b))
                    return GreenValue(
                        value=value,
                        error_bound=min(bound, tol),
                        escaped_at=escaped_at,
                        iterations_used=n,
                    )
        x, y = step(params, x, y)
        n += 1
    return GreenValue(0.0, 0.0, None, n - 1, assumed_in_k=True)


@dataclass(frozen=True)
class GreenPairValue:
    """G+ and G- at one point; both zero marks the point as in K."""

    plus: GreenValue
    minus: GreenValue

    @property
    def in_k(self) -> bool:
        return self.plus.value == 0.0 and self.minus.value == 0.0


def green_pair(params: HenonParams, p: Point2, tol: float = 1e-10,
               max_iter: int = _GREEN2D_MAX_ITER) -> GreenPairValue:
    return GreenPairValue(
        plus=green_2d(params, p, "plus", tol, max_iter),
        minus=green_2d(params, p, "minus", tol, max_iter),
    )


def green_plus_batch(
    params: HenonParams,
    X: np.ndarray,
    Y: np.ndarray,
    depth: int,
    rate_tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized forward escape rate over point arrays.

    Returns (value, escaped_mask, escape_step); bounded-at-depth points get
    value 0 and step -1.  Escaped points are refined past the certificate
    until their tail bound drops under rate_tol, which the doubly
    exponential growth reaches within a few extra squarings.  As in
    green_2d, a return to within 1e-10 of the start before certification
    freezes the point as bounded (periodic-shadow inputs).
    """
    a_m, b_m = abs(params.a), abs(params.b)
    radius = params.filtration_radius
    x = np.array(X, dtype=np.complex128).ravel()
    y = np.array(Y, dtype=np.complex128).ravel()
    shape = np.shape(X)
    size = x.size
    # clamp non-finite inputs (deep zoom overflows) to a huge finite escape
    bad = ~(np.isfinite(x) & np.isfinite(y))
    x[bad] = 1e120
    y[bad] = 0.0
    x0, y0 = x.copy(), y.copy()
    value = np.zeros(size)
    esc_step = np.full(size, -1, dtype=np.int64)
    escaped = np.zeros(size, dtype=bool)
    done = np.zeros(size, dtype=bool)
    max_steps = depth + 80
    for step_no in range(max_steps + 1):
        act = ~done
        if not act.any():
            break
        if step_no > 0:
            revisit = act & ~escaped
            if revisit.any():
                near = (np.abs(x[revisit] - x0[revisit]) <= CYCLE_TOL) \
                    & (np.abs(y[revisit] - y0[revisit]) <= CYCLE_TOL)
                done[np.where(revisit)[0][near]] = True
            act = ~done
            if not act.any():
                break
        ax = np.abs(x[act])
        ay = np.abs(y[act])
        cert = (ax > radius * (1.0 + CERT_MARGIN)) & (ax >= ay)
        newly = act.copy()
        newly[act] = cert & ~escaped[act]
        esc_step[newly] = step_no
        escaped |= newly
        # refine escaped-but-not-done points: certified tail bound
        ref = escaped & ~done
        if ref.any():
            m = np.abs(x[ref])
            t = (a_m + b_m * m) / np.maximum(m * m, 1e-300)
            ok = t < 1.0
            bound = np.full(m.shape, np.inf)
            bound[ok] = (2.0 ** -step_no) * (-np.log1p(-t[ok]))
            fin = (bound <= rate_tol) | (m > 1e60)
            idx = np.where(ref)[0][fin]
            value[idx] = (2.0 ** -step_no) * np.log(np.abs(x[idx]))
            done[idx] = True
        if step_no >= depth:
            # past the iteration budget only escaped points keep refining
            stop = ~done & ~escaped
            done[stop] = True
        act = ~done
        if step_no == max_steps or not act.any():
            break
        xn = params.a - params.b * y[act] - x[act] * x[act]
        y[act] = x[act]
        x[act] = xn
    # anything still refining at the cap: use the current certified value
    rem = escaped & ~done
    if rem.any():
        value[rem] = (2.0 ** -max_steps) * np.log(np.abs(x[rem]))
    return value.reshape(shape), escaped.reshape(shape), esc_step.reshape(shape)


@dataclass(eq=False)
class MeasureSample2D:
    """Saddle periodic-point cloud standing in for the equilibrium measure.

    Points are uniformly weighted; undercount vs. the 2^n fixed-point count
    of f^n is flagged, not fatal, since root finding is a search.
    """

    records: tuple[SaddleRecord, ...]
    period_range: tuple[int, int]
    seed: int
    undercounted_periods: tuple[int, ...] = ()

    @property
    def points(self) -> list[Point2]:
        return [r.location for r in self.records]

    @property
    def source_periods(self) -> list[int]:
        return [r.exact_period for r in self.records]

    def __len__(self) -> int:
        return len(self.records)


def sample_mu(
    params: HenonParams,
    period_range: tuple[int, int] = (1, 5),
    budget: Optional[SearchBudget] = None,
    seed: int = 0,
) -> MeasureSample2D:
    """All saddle periodic points with exact period in the given range."""
    lo, hi = period_range
    if lo < 1 or hi > 12 or lo > hi:
        raise DomainError("period_range must lie within [1, 12]")
    records: list[SaddleRecord] = []
    undercounted: list[int] = []
    for n in range(lo, hi + 1):
        found = find_periodic(params, n, "complex_grid", budget, seed)
        if len(found) < (1 << n):
            undercounted.append(n)
        base = max((r.orbit_id for r in records), default=-1) + 1
        for r in found:
            if r.exact_period == n and r.is_saddle:
                records.append(SaddleRecord(
                    location=r.location, period=r.period,
                    exact_period=r.exact_period, lambda_u=r.lambda_u,
                    lambda_s=r.lambda_s, unstable_vector=r.unstable_vector,
                    residual=r.residual, tag=r.tag,
                    orbit_id=base + r.orbit_id,
                ))
    return MeasureSample2D(tuple(records), (lo, hi), seed, tuple(undercounted))
