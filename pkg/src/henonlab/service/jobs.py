"""Pure compute jobs shared by the HTTP endpoints and the CLI.

Everything here is a deterministic function of its query model, which is
what makes tile bytes reproducible and lets the CLI and the service share
one code path per artifact.
"""

from __future__ import annotations

from ..dynamics import DomainError, HenonParams
from ..hslc import SliceImage
from ..potential import sample_mu
from ..saddles import SaddleRecord, default_saddle, fixed_points, linearize
from ..slices import (
    ParamRegion,
    ProbeBudget,
    estimate_lambda_minus,
    estimate_lambda_plus,
    render_parameter_plane,
    render_slice,
    unstable_connectivity,
)
from .models import DynTileQuery, ParamTileQuery, VerdictQuery


def pick_saddle(params: HenonParams, label: str) -> SaddleRecord:
    """Resolve a saddle label: "auto" or "fpK" (fixed points by |lambda_u|)."""
    if label == "auto":
        saddle = default_saddle(params)
        if saddle is None:
            raise DomainError("no saddle fixed point at these parameters")
        return saddle
    if label.startswith("fp"):
        fps = fixed_points(params)
        try:
            idx = int(label[2:])
            rec = fps[idx]
        except (ValueError, IndexError):
            raise DomainError(f"unknown saddle label {label!r}")
        if not rec.is_saddle:
            raise DomainError(f"fixed point {label} is not a saddle")
        return rec
    raise DomainError(f"unknown saddle label {label!r}")


def dyn_tile(q: DynTileQuery) -> SliceImage:
    params = HenonParams(complex(q.a, q.a_im), complex(q.b, q.b_im))
    saddle = pick_saddle(params, q.saddle)
    lin = linearize(params, saddle)
    return render_slice(
        params, lin, (q.x0, q.y0, q.x1, q.y1), (q.w, q.h),
        depth=q.depth, rate_tol=q.rate_tol,
    )


def param_tile(q: ParamTileQuery, wall_clock_seconds=None) -> SliceImage:
    if q.mode == "complex_a":
        region = ParamRegion(kind="complex_a", b=complex(q.b, q.b_im),
                             re0=q.re0, im0=q.im0, re1=q.re1, im1=q.im1)
    else:
        region = ParamRegion(kind="real_ab", a0=q.a0, b0=q.b0, a1=q.a1, b1=q.b1)
    budget = ProbeBudget(zgrid=q.zgrid, depth=q.depth,
                         wall_clock_seconds=wall_clock_seconds)
    return render_parameter_plane(region, q.probe, (q.w, q.h), budget, seed=q.seed)


def verdict(q: VerdictQuery) -> dict:
    params = HenonParams(complex(q.a, q.a_im), complex(q.b, q.b_im))
    assessment = unstable_connectivity(params)
    payload = assessment.to_dict()
    payload["a"] = q.a
    payload["b"] = q.b
    try:
        mu = sample_mu(params, (1, q.period_max), seed=q.seed)
        lp = estimate_lambda_plus(params, mu)
        lm = estimate_lambda_minus(params, mu)
        payload["lambda_plus"] = {"value": lp.value, "stderr": lp.stderr}
        payload["lambda_minus"] = {"value": lm.value, "stderr": lm.stderr}
        payload["sample_points"] = len(mu)
    except DomainError as exc:
        payload["lambda_plus"] = payload["lambda_minus"] = None
        payload["exponent_error"] = str(exc)
    return payload
