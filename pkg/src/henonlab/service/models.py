"""Request/response models for the tile service; validation lives here."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

MAX_TILE = 4096
MAX_DEPTH = 100_000


class DynTileQuery(BaseModel):
    a: float
    b: float
    a_im: float = 0.0
    b_im: float = 0.0
    saddle: str = "auto"
    x0: float = -10.0
    y0: float = -10.0
    x1: float = 10.0
    y1: float = 10.0
    w: int = Field(default=256, ge=1, le=MAX_TILE)
    h: int = Field(default=256, ge=1, le=MAX_TILE)
    depth: int = Field(default=200, ge=1, le=MAX_DEPTH)
    rate_tol: float = Field(default=1e-6, ge=1e-12, le=1e-2)

    @model_validator(mode="after")
    def _checks(self):
        if complex(self.b, self.b_im) == 0:
            raise ValueError("b must be nonzero")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("window must satisfy x1 > x0 and y1 > y0")
        return self

    def cache_key(self) -> tuple:
        return tuple(sorted(self.model_dump().items()))


class ParamTileQuery(BaseModel):
    probe: Literal["connectivity", "horseshoe", "escape_of_measure"] = "connectivity"
    mode: Literal["complex_a", "real_ab"] = "complex_a"
    b: float = 0.0
    b_im: float = 0.0
    re0: float = -2.5
    im0: float = -1.5
    re1: float = 3.5
    im1: float = 1.5
    a0: float = -1.0
    b0: float = 0.05
    a1: float = 4.0
    b1: float = 0.95
    w: int = Field(default=64, ge=1, le=1024)
    h: int = Field(default=64, ge=1, le=1024)
    zgrid: int = Field(default=48, ge=8, le=256)
    depth: int = Field(default=150, ge=1, le=MAX_DEPTH)
    seed: int = 0

    @model_validator(mode="after")
    def _checks(self):
        if self.mode == "complex_a":
            if complex(self.b, self.b_im) == 0:
                raise ValueError("b must be nonzero")
            if not (self.re1 > self.re0 and self.im1 > self.im0):
                raise ValueError("window must satisfy re1 > re0 and im1 > im0")
        else:
            if not (self.a1 > self.a0 and self.b1 > self.b0):
                raise ValueError("window must satisfy a1 > a0 and b1 > b0")
        return self

    def cache_key(self) -> tuple:
        return tuple(sorted(self.model_dump().items()))


class VerdictQuery(BaseModel):
    a: float
    b: float
    a_im: float = 0.0
    b_im: float = 0.0
    period_max: int = Field(default=4, ge=1, le=8)
    seed: int = 0

    @model_validator(mode="after")
    def _checks(self):
        if complex(self.b, self.b_im) == 0:
            raise ValueError("b must be nonzero")
        return self

    def cache_key(self) -> tuple:
        return tuple(sorted(self.model_dump().items()))
