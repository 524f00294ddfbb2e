"""Command-line client for the lab.

Every subcommand resolves its configuration (seed always explicit), runs
the corresponding job from the service layer or core modules, writes the
artifact, and writes a JSON run-manifest next to it (resolved config,
package versions, timings, artifact hash).  Exit codes: 0 success,
2 validation error, 3 budget exhaustion.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import BudgetExceeded, DomainError, HenonParams, Point2, QuadParam
from .hslc import canonical_json, to_bytes, to_png, to_ppm
from .horseshoe import (
    BoundaryScanConfig,
    boundary_scan,
    certificate_to_text,
    certify_horseshoe,
    certify_horseshoe_1d,
    entropy_census,
)
from .potential import green_2d, sample_mu
from .quadratic import connectivity_1d, green_1d, lyapunov_1d
from .saddles import find_periodic
from .service import jobs
from .service.models import DynTileQuery, ParamTileQuery, VerdictQuery
from .slices import estimate_lambda_minus, estimate_lambda_plus


def _write_artifact(path: Path, data: bytes, config: dict, t0: float) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    manifest = {
        "command": config.pop("_command"),
        "config": config,
        "artifact": path.name,
        "artifact_sha256": hashlib.sha256(data).hexdigest(),
        "versions": {
            "henonlab": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "timings": {"seconds": round(time.time() - t0, 6)},
    }
    Path(str(path) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _json_artifact(args, payload: dict, config: dict, t0: float) -> None:
    data = canonical_json(payload) + b"\n"
    _write_artifact(Path(args.out), data, config, t0)
    print(json.dumps(payload, indent=2, sort_keys=True))


def _cfg(args, command: str) -> dict:
    d = {k: v for k, v in vars(args).items() if k != "func"}
    d.setdefault("seed", 0)  # every resolved config carries its seed
    d["_command"] = command
    return d


def _complex(re: float, im: float) -> complex:
    return complex(re, im)


def cmd_green(args) -> None:
    t0 = time.time()
    if args.b is None and args.b_im == 0.0:
        g = green_1d(QuadParam(_complex(args.a, args.a_im)), _complex(args.z, args.z_im),
                     tol=args.tol)
    else:
        params = HenonParams(_complex(args.a, args.a_im),
                             _complex(args.b or 0.0, args.b_im))
        p = Point2(_complex(args.x, args.x_im), _complex(args.y, args.y_im))
        g = green_2d(params, p, args.sign, tol=args.tol)
    payload = {
        "value": g.value, "error_bound": g.error_bound,
        "escaped_at": g.escaped_at, "iterations_used": g.iterations_used,
        "assumed_in_k": g.assumed_in_k,
    }
    _json_artifact(args, payload, _cfg(args, "green"), t0)


def cmd_connectivity_1d(args) -> None:
    t0 = time.time()
    res = connectivity_1d(QuadParam(_complex(args.a, args.a_im)), args.max_iter)
    payload = {"verdict": res.verdict, "escape_step": res.escape_step,
               "depth": res.depth}
    _json_artifact(args, payload, _cfg(args, "connectivity-1d"), t0)


def cmd_lyapunov_1d(args) -> None:
    t0 = time.time()
    est = lyapunov_1d(QuadParam(_complex(args.a, args.a_im)), args.method,
                      tol=args.tol, n_points=args.n_points, depth=args.depth,
                      seed=args.seed)
    payload = {
        "value": est.value, "method": est.method, "stderr": est.stderr,
        "rejected": est.rejected, "entropy": est.entropy,
        "hausdorff_dim": est.hausdorff_dim,
    }
    _json_artifact(args, payload, _cfg(args, "lyapunov-1d"), t0)
    print(f"lambda = {est.value!r}")


def cmd_saddles(args) -> None:
    t0 = time.time()
    params = HenonParams(_complex(args.a, args.a_im), _complex(args.b, args.b_im))
    recs = find_periodic(params, args.n, args.search, seed=args.seed)
    payload = {"count": len(recs), "records": [r.to_dict() for r in recs]}
    _json_artifact(args, payload, _cfg(args, "saddles"), t0)


def cmd_render_slice(args) -> None:
    t0 = time.time()
    q = DynTileQuery(
        a=args.a, a_im=args.a_im, b=args.b, b_im=args.b_im, saddle=args.saddle,
        x0=args.window[0], y0=args.window[1], x1=args.window[2], y1=args.window[3],
        w=args.res, h=args.res, depth=args.depth, rate_tol=args.rate_tol,
    )
    img = jobs.dyn_tile(q)
    _write_artifact(Path(args.out), to_bytes(img), _cfg(args, "render-slice"), t0)
    if args.ppm:
        Path(args.ppm).write_bytes(to_ppm(img))
    if args.png:
        Path(args.png).write_bytes(to_png(img))
    if args.summary:
        from .slices import slice_summary

        Path(args.summary).write_bytes(canonical_json(slice_summary(img)) + b"\n")
    print(f"wrote {args.out} ({img.width}x{img.height}, "
          f"bounded fraction {img.bounded_fraction():.4f})")


def cmd_connectivity_2d(args) -> None:
    t0 = time.time()
    q = VerdictQuery(a=args.a, b=args.b, a_im=args.a_im, b_im=args.b_im,
                     period_max=args.period_max, seed=args.seed)
    payload = jobs.verdict(q)
    _json_artifact(args, payload, _cfg(args, "connectivity-2d"), t0)


def cmd_render_param(args) -> None:
    t0 = time.time()
    if args.mode == "complex_a":
        q = ParamTileQuery(probe=args.probe, mode="complex_a", b=args.b,
                           b_im=args.b_im, re0=args.region[0], im0=args.region[1],
                           re1=args.region[2], im1=args.region[3],
                           w=args.res, h=args.res_y or args.res,
                           zgrid=args.zgrid, depth=args.depth, seed=args.seed)
    else:
        q = ParamTileQuery(probe=args.probe, mode="real_ab",
                           a0=args.region[0], b0=args.region[1],
                           a1=args.region[2], b1=args.region[3],
                           w=args.res, h=args.res_y or args.res,
                           zgrid=args.zgrid, depth=args.depth, seed=args.seed)
    img = jobs.param_tile(q, wall_clock_seconds=args.budget)
    if img.provenance.get("partial"):
        print("wall-clock budget hit; remaining cells are undecided (partial)")
    _write_artifact(Path(args.out), to_bytes(img), _cfg(args, "render-param"), t0)
    if args.ppm:
        Path(args.ppm).write_bytes(to_ppm(img))
    print(f"wrote {args.out}")


def cmd_lambda(args) -> None:
    t0 = time.time()
    params = HenonParams(_complex(args.a, args.a_im), _complex(args.b, args.b_im))
    mu = sample_mu(params, (args.n_min, args.n_max), seed=args.seed)
    lp = estimate_lambda_plus(params, mu)
    lm = estimate_lambda_minus(params, mu)
    payload = {
        "lambda_plus": {"value": lp.value, "stderr": lp.stderr},
        "lambda_minus": {"value": lm.value, "stderr": lm.stderr},
        "sum": lp.value + lm.value,
        "log_abs_jacobian": math.log(abs(params.b)),
        "sample_points": len(mu),
        "undercounted_periods": list(mu.undercounted_periods),
    }
    _json_artifact(args, payload, _cfg(args, "lambda"), t0)


def cmd_horseshoe_certify(args) -> None:
    t0 = time.time()
    if args.one_dim:
        cert = certify_horseshoe_1d(args.a)
        text = (f"henonlab 1d horseshoe certificate v1\n"
                f"a: {float(args.a).hex()} (~{args.a:.9g})\n"
                f"box_radius: {cert.box_radius.hex()} (~{cert.box_radius:.9g})\n"
                f"verified: {str(cert.verified).lower()}\n"
                + (f"failure: {cert.failure}\n" if cert.failure else ""))
        verified = cert.verified
    else:
        cert = certify_horseshoe(args.a, args.b)
        text = certificate_to_text(cert)
        verified = cert.verified
    _write_artifact(Path(args.out), text.encode(), _cfg(args, "horseshoe-certify"), t0)
    print(text, end="")
    print(f"verified: {verified}")


def cmd_census(args) -> None:
    t0 = time.time()
    rep = entropy_census(args.a, args.b, n_max=args.n_max, seed=args.seed)
    _json_artifact(args, rep.to_dict(), _cfg(args, "census"), t0)


def cmd_boundary_scan(args) -> None:
    from .horseshoe import boundary_report_to_text

    t0 = time.time()
    cfg = BoundaryScanConfig(n_census=args.n_census, seed=args.seed,
                             wall_clock_seconds=args.budget)
    rep = boundary_scan(args.b, (args.bracket[0], args.bracket[1]), cfg)
    _json_artifact(args, rep.to_dict(), _cfg(args, "boundary-scan"), t0)
    Path(str(args.out) + ".txt").write_text(boundary_report_to_text(rep))


def cmd_serve(args) -> None:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")


def _add_complex(p, name: str, default=None, required=False):
    p.add_argument(f"--{name}", type=float, default=default, required=required)
    p.add_argument(f"--{name}-im", type=float, default=0.0,
                   help=f"imaginary part of {name}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="henonlab",
        description="Numerical laboratory for complex Henon maps",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("green", help="1D/2D escape-rate potential")
    _add_complex(p, "a", required=True)
    _add_complex(p, "b")
    _add_complex(p, "z", default=0.0)
    _add_complex(p, "x", default=0.0)
    _add_complex(p, "y", default=0.0)
    p.add_argument("--sign", choices=["plus", "minus"], default="plus")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", default="green.json")
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("connectivity-1d", help="Julia-set connectivity for a - x^2")
    _add_complex(p, "a", required=True)
    p.add_argument("--max-iter", type=int, default=4096)
    p.add_argument("--out", default="connectivity1d.json")
    p.set_defaults(func=cmd_connectivity_1d)

    p = sub.add_parser("lyapunov-1d", help="1D Lyapunov exponent of the equilibrium measure")
    _add_complex(p, "a", required=True)
    p.add_argument("--method", choices=["critical_formula", "ergodic_average"],
                   default="critical_formula")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--n-points", type=int, default=10_000)
    p.add_argument("--depth", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="lyapunov1d.json")
    p.set_defaults(func=cmd_lyapunov_1d)

    p = sub.add_parser("saddles", help="periodic points of period n")
    _add_complex(p, "a", required=True)
    _add_complex(p, "b", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--search", choices=["complex_grid", "real_grid"],
                   default="complex_grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="saddles.json")
    p.set_defaults(func=cmd_saddles)

    p = sub.add_parser("render-slice", help="escape-rate picture of an unstable slice")
    _add_complex(p, "a", required=True)
    _add_complex(p, "b", required=True)
    p.add_argument("--saddle", default="auto")
    p.add_argument("--window", type=float, nargs=4, default=[-10.0, -10.0, 10.0, 10.0],
                   metavar=("X0", "Y0", "X1", "Y1"))
    p.add_argument("--res", type=int, default=512)
    p.add_argument("--depth", type=int, default=200)
    p.add_argument("--rate-tol", type=float, default=1e-6)
    p.add_argument("--out", default="slice.hslc")
    p.add_argument("--ppm", default=None, help="also export portable pixmap")
    p.add_argument("--png", default=None, help="also export PNG")
    p.add_argument("--summary", default=None,
                   help="also export a JSON summary (verdict, boxes)")
    p.set_defaults(func=cmd_render_slice)

    p = sub.add_parser("connectivity-2d", help="unstable connectivity verdict")
    _add_complex(p, "a", required=True)
    _add_complex(p, "b", required=True)
    p.add_argument("--period-max", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="connectivity2d.json")
    p.set_defaults(func=cmd_connectivity_2d)

    p = sub.add_parser("render-param", help="parameter-plane probe scan")
    p.add_argument("--probe", choices=["connectivity", "horseshoe", "escape_of_measure"],
                   default="connectivity")
    p.add_argument("--mode", choices=["complex_a", "real_ab"], default="complex_a")
    _add_complex(p, "b")
    p.add_argument("--region", type=float, nargs=4, required=True,
                   metavar=("LO0", "LO1", "HI0", "HI1"),
                   help="complex_a: re0 im0 re1 im1; real_ab: a0 b0 a1 b1")
    p.add_argument("--res", type=int, default=64)
    p.add_argument("--res-y", type=int, default=None)
    p.add_argument("--zgrid", type=int, default=48)
    p.add_argument("--depth", type=int, default=150)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=float, default=None,
                   help="wall-clock seconds; partial results are flagged")
    p.add_argument("--out", default="param.hslc")
    p.add_argument("--ppm", default=None)
    p.set_defaults(func=cmd_render_param)

    p = sub.add_parser("lambda", help="Lyapunov exponents from the saddle cloud")
    _add_complex(p, "a", required=True)
    _add_complex(p, "b", required=True)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="lambda.json")
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("horseshoe-certify", help="interval horseshoe certificate")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, default=0.3)
    p.add_argument("--one-dim", action="store_true",
                   help="certify x -> a - x^2 instead of the plane map")
    p.add_argument("--out", default="certificate.txt")
    p.set_defaults(func=cmd_horseshoe_certify)

    p = sub.add_parser("census", help="real/complex periodic point counts")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="census.json")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("boundary-scan", help="bracket the horseshoe-locus boundary in a")
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--bracket", type=float, nargs=2, required=True,
                   metavar=("A_LO", "A_HI"))
    p.add_argument("--n-census", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=float, default=None,
                   help="wall-clock seconds; an early stop is flagged")
    p.add_argument("--out", default="boundary.json")
    p.set_defaults(func=cmd_boundary_scan)

    p = sub.add_parser("serve", help="run the HTTP tile service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8757)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except DomainError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
