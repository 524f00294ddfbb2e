"""HSLC binary image format, plus portable-pixmap and PNG encoders.

Layout (all little-endian):

    bytes 0-3   magic "HSLC"
    u32         version (1)
    u32 u32     W, H
    f64 x4      window x0, y0, x1, y1
    u32         provenance length P
    P bytes     provenance, canonical JSON (sorted keys, no whitespace)
    W*H records (f32 rate, u8 status), row-major, row 0 at the y0 edge

Raw rate/status data is the source of truth; palettes are applied only at
the export edge so golden tests compare data, not colors.

Status bytes: dynamical slices use 0 = bounded-at-depth (colored black),
1 = escaped.  Parameter-plane images use 0 = connected-at-resolution,
1 = disconnected, 2 = undecided.

Default palette: bounded/connected cells are black/blue as listed below;
escaped cells take t = log1p(rate) to channels
round(127.5 * (1 - cos(f * t))) with f = (2.0, 3.5, 5.0) for (r, g, b).
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass

import numpy as np

from .dynamics import DomainError

__all__ = [
    "MAGIC",
    "VERSION",
    "STATUS_BOUNDED",
    "STATUS_ESCAPED",
    "PARAM_CONNECTED",
    "PARAM_DISCONNECTED",
    "PARAM_UNDECIDED",
    "SliceImage",
    "to_bytes",
    "from_bytes",
    "to_rgb",
    "to_ppm",
    "to_png",
]

MAGIC = b"HSLC"
VERSION = 1

STATUS_BOUNDED = 0
STATUS_ESCAPED = 1
PARAM_CONNECTED = 0
PARAM_DISCONNECTED = 1
PARAM_UNDECIDED = 2

_RECORD = np.dtype([("rate", "<f4"), ("status", "u1")])


@dataclass(eq=False)
class SliceImage:
    """A rectangular grid of escape-rate cells plus its provenance.

    rates/status have shape (H, W); row 0 corresponds to the window's y0
    edge.  The provenance dict is the full recipe (params, saddle, depth,
    resolution, seed) that makes the image a pure function of it.
    """

    rates: np.ndarray
    status: np.ndarray
    window: tuple[float, float, float, float]
    provenance: dict

    def __post_init__(self):
        if self.rates.shape != self.status.shape or self.rates.ndim != 2:
            raise DomainError("rates/status must be matching 2-D arrays")
        x0, y0, x1, y1 = self.window
        if not (x1 > x0 and y1 > y0):
            raise DomainError("window must be nonempty")

    @property
    def width(self) -> int:
        return self.rates.shape[1]

    @property
    def height(self) -> int:
        return self.rates.shape[0]

    @property
    def kind(self) -> str:
        return self.provenance.get("kind", "dyn")

    def bounded_fraction(self) -> float:
        return float(np.mean(self.status == STATUS_BOUNDED))


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=False).encode("utf-8")


def to_bytes(img: SliceImage) -> bytes:
    head = struct.pack("<4sIII", MAGIC, VERSION, img.width, img.height)
    win = struct.pack("<4d", *img.window)
    prov = canonical_json(img.provenance)
    body = np.empty(img.rates.size, dtype=_RECORD)
    body["rate"] = img.rates.astype(np.float32).ravel()
    body["status"] = img.status.astype(np.uint8).ravel()
    return head + win + struct.pack("<I", len(prov)) + prov + body.tobytes()


def from_bytes(data: bytes) -> SliceImage:
    magic, version, w, h = struct.unpack_from("<4sIII", data, 0)
    if magic != MAGIC:
        raise DomainError("not an HSLC stream")
    if version != VERSION:
        raise DomainError(f"unsupported HSLC version {version}")
    window = struct.unpack_from("<4d", data, 16)
    (plen,) = struct.unpack_from("<I", data, 48)
    prov = json.loads(data[52:52 + plen].decode("utf-8"))
    body = np.frombuffer(data, dtype=_RECORD, count=w * h, offset=52 + plen)
    rates = body["rate"].reshape(h, w).astype(np.float32)
    status = body["status"].reshape(h, w).astype(np.uint8)
    return SliceImage(rates=rates, status=status, window=tuple(window),
                      provenance=prov)


_PARAM_COLORS = {
    PARAM_CONNECTED: (40, 40, 200),
    PARAM_DISCONNECTED: (235, 235, 235),
    PARAM_UNDECIDED: (160, 40, 40),
}


def to_rgb(img: SliceImage) -> np.ndarray:
    """Apply the documented default palette; returns (H, W, 3) uint8.

    Rows are flipped so row 0 of the output is the top of the picture, the
    usual raster convention.
    """
    h, w = img.rates.shape
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    if img.kind == "param":
        for code, color in _PARAM_COLORS.items():
            rgb[img.status == code] = color
    else:
        esc = img.status == STATUS_ESCAPED
        t = np.log1p(np.maximum(img.rates, 0.0).astype(np.float64))
        for c, f in enumerate((2.0, 3.5, 5.0)):
            chan = np.round(127.5 * (1.0 - np.cos(f * t))).astype(np.uint8)
            rgb[..., c] = np.where(esc, chan, 0)
    return rgb[::-1]


def to_ppm(img: SliceImage) -> bytes:
    rgb = to_rgb(img)
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + rgb.tobytes()


def to_png(img: SliceImage) -> bytes:
    from PIL import Image

    rgb = to_rgb(img)
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
