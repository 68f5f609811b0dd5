"""Image representation and lossless 8-bit I/O.

Planes are ``(H, W)`` float64 arrays and color images are ``(H, W, 3)``
float64 arrays, both holding intensities on the ``[0, 1]`` scale. Files are
read and written as 8-bit PNG or binary PPM (P6, maxval 255).
"""
from __future__ import annotations

import io
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ImageDecodeError, ShapeError, UnsupportedFormatError

LUMA_COEFFS = np.array([0.299, 0.587, 0.114])

_PPM_MAGIC = b"P6"
_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def as_plane(p, name="plane"):
    """Validate and return ``p`` as a finite 2-D float64 array."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def as_color(img, name="image"):
    """Validate and return ``img`` as a finite ``(H, W, 3)`` float64 array."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must have shape (H, W, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def quantize(values) -> np.ndarray:
    """Clamp to [0, 1] and map to uint8 codes with round-half-up."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


def dequantize(codes) -> np.ndarray:
    return np.asarray(codes, dtype=np.float64) / 255.0


def rgb_to_luma(img) -> np.ndarray:
    """BT.601 luma ``0.299 r + 0.587 g + 0.114 b``."""
    img = as_color(img)
    y = img[..., 0] * LUMA_COEFFS[0] + img[..., 1] * LUMA_COEFFS[1] + img[..., 2] * LUMA_COEFFS[2]
    # a convex combination can still leave [min, max] by one ulp
    return np.clip(y, img.min(axis=2), img.max(axis=2))


def gray_to_color(plane) -> np.ndarray:
    plane = as_plane(plane)
    return np.repeat(plane[:, :, None], 3, axis=2)


# -- decoding ---------------------------------------------------------------

_PPM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _decode_ppm(data: bytes) -> np.ndarray:
    pos = len(_PPM_MAGIC)
    fields = []
    for _ in range(3):
        m = _PPM_TOKEN.match(data, pos)
        if m is None:
            raise ImageDecodeError("truncated PPM header")
        try:
            fields.append(int(m.group(1)))
        except ValueError:
            raise ImageDecodeError(f"bad PPM header field {m.group(1)!r}") from None
        pos = m.end()
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageDecodeError(f"bad PPM dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormatError(f"PPM maxval {maxval} is not supported (need 255)")
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ImageDecodeError("missing whitespace after PPM header")
    pos += 1
    n = width * height * 3
    raster = data[pos:pos + n]
    if len(raster) != n:
        raise ImageDecodeError(f"PPM raster has {len(raster)} bytes, expected {n}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)


def _decode_png(data: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            mode = im.mode
            if mode not in ("RGB", "RGBA"):
                raise UnsupportedFormatError(f"PNG mode {mode!r} is not 8-bit RGB/RGBA")
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except UnsupportedFormatError:
        raise
    except Exception as exc:  # Pillow raises a zoo of types for corrupt data
        raise ImageDecodeError(f"cannot decode PNG: {exc}") from exc
    return arr


def decode_image(data: bytes) -> np.ndarray:
    """Decode PNG or P6 PPM bytes into an ``(H, W, 3)`` array in [0, 1]."""
    if data.startswith(_PNG_MAGIC):
        codes = _decode_png(data)
    elif data.startswith(_PPM_MAGIC):
        codes = _decode_ppm(data)
    else:
        raise ImageDecodeError("unrecognised image signature (expected PNG or P6 PPM)")
    return dequantize(codes)


# -- encoding ---------------------------------------------------------------

def encode_image(img, fmt: str = "png") -> bytes:
    """Encode a color image as 8-bit PNG or PPM bytes.

    Values are clamped to [0, 1] and quantized with round-half-up, so
    ``decode_image(encode_image(x))`` is within 1/510 of ``x``.
    """
    codes = quantize(as_color(img))
    fmt = fmt.lower()
    if fmt == "ppm":
        h, w, _ = codes.shape
        return b"P6\n%d %d\n255\n" % (w, h) + codes.tobytes()
    if fmt == "png":
        buf = io.BytesIO()
        Image.fromarray(codes, mode="RGB").save(buf, format="PNG")
        return buf.getvalue()
    raise ValueError(f"unknown output format {fmt!r}")


def format_for_path(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        return "png"
    if suffix in (".ppm", ".pnm"):
        return "ppm"
    raise ValueError(f"cannot infer image format from {str(path)!r}")


def read_image(path) -> np.ndarray:
    return decode_image(Path(path).read_bytes())


def write_image(path, img) -> None:
    Path(path).write_bytes(encode_image(img, format_for_path(path)))
