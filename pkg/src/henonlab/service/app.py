"""FastAPI tile service: stateless, cacheable, bounded worker pool.

Identical query strings produce identical bytes (jobs are pure and results
are memoized on the canonical query).  Validation failures return 400 with
machine-readable field errors; a saturated worker pool returns 503 with
Retry-After rather than queueing without bound.
"""

from __future__ import annotations

import os
import threading
from collections import OrderedDict
from typing import Callable

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ValidationError

from .. import __version__
from ..dynamics import BudgetExceeded, DomainError
from ..hslc import canonical_json, to_bytes, to_png
from . import jobs
from .models import DynTileQuery, ParamTileQuery, VerdictQuery

HSLC_MIME = "application/x-hslc"
_CACHE_SIZE = 128


def _pool_size() -> int:
    env = os.environ.get("HENONLAB_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


class _BoundedCache:
    """Tiny LRU keyed by the canonical query tuple; thread-safe."""

    def __init__(self, size: int):
        self._data: OrderedDict = OrderedDict()
        self._size = size
        self._lock = threading.Lock()

    def get_or_compute(self, key, fn: Callable[[], object]):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        value = fn()
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self._size:
                self._data.popitem(last=False)
        return value


class PoolSaturated(Exception):
    pass


def _validation_response(exc: ValidationError) -> JSONResponse:
    fields = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"])
        msg = err["msg"]
        if not loc:
            # model-level check: our messages lead with the offending field
            head = msg.removeprefix("Value error, ").split()
            loc = head[0] if head else ""
        fields.append({"field": loc, "message": msg})
    return JSONResponse(status_code=400, content={"errors": fields})


def _domain_response(exc: DomainError) -> JSONResponse:
    return JSONResponse(status_code=400,
                        content={"errors": [{"field": "", "message": str(exc)}]})


def create_app() -> FastAPI:
    app = FastAPI(title="henonlab tile service", version=__version__)
    # the explorer UI is served separately; all endpoints are read-only
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["GET"])
    pool = threading.BoundedSemaphore(_pool_size())
    cache = _BoundedCache(_CACHE_SIZE)
    app.state.pool = pool  # exposed so tests can saturate it deterministically

    def run_job(key, fn):
        if not pool.acquire(blocking=False):
            raise PoolSaturated()
        try:
            return cache.get_or_compute(key, fn)
        finally:
            pool.release()

    @app.exception_handler(PoolSaturated)
    async def _saturated_handler(request: Request, exc: PoolSaturated):
        return JSONResponse(status_code=503, content={"error": "worker pool saturated"},
                            headers={"Retry-After": "1"})

    def parse(model: type[BaseModel], request: Request) -> BaseModel:
        return model(**dict(request.query_params))

    @app.get("/meta")
    def meta():
        return {
            "name": "henonlab",
            "version": __version__,
            "threads": _pool_size(),
            "endpoints": ["/meta", "/tile/dyn", "/tile/param", "/verdict"],
            "formats": {"tile": [HSLC_MIME, "image/png"]},
            "palette": ("bounded cells black; escaped cells colored by "
                        "t = log1p(rate), channel = round(127.5*(1-cos(f*t))), "
                        "f = (2.0, 3.5, 5.0)"),
            "defaults": {"dyn": DynTileQuery(a=6.0, b=0.3).model_dump(),
                         "param": ParamTileQuery(b=0.3).model_dump()},
        }

    def _tile_response(img, request: Request) -> Response:
        accept = request.headers.get("accept", "")
        if HSLC_MIME in accept:
            return Response(content=to_bytes(img), media_type=HSLC_MIME)
        return Response(content=to_png(img), media_type="image/png")

    @app.get("/tile/dyn")
    def tile_dyn(request: Request):
        try:
            q = parse(DynTileQuery, request)
        except ValidationError as exc:
            return _validation_response(exc)
        try:
            img = run_job(("dyn", q.cache_key()), lambda: jobs.dyn_tile(q))
        except DomainError as exc:
            return _domain_response(exc)
        return _tile_response(img, request)

    @app.get("/tile/param")
    def tile_param(request: Request):
        try:
            q = parse(ParamTileQuery, request)
        except ValidationError as exc:
            return _validation_response(exc)
        try:
            img = run_job(("param", q.cache_key()), lambda: jobs.param_tile(q))
        except (DomainError, BudgetExceeded) as exc:
            return _domain_response(DomainError(str(exc)))
        return _tile_response(img, request)

    @app.get("/verdict")
    def verdict(request: Request):
        try:
            q = parse(VerdictQuery, request)
        except ValidationError as exc:
            return _validation_response(exc)
        try:
            payload = run_job(("verdict", q.cache_key()), lambda: jobs.verdict(q))
        except DomainError as exc:
            return _domain_response(exc)
        return Response(content=canonical_json(payload),
                        media_type="application/json")

    return app
