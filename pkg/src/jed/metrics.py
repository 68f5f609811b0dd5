"""Image-quality measurements and the histogram-equalization baseline."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .imagecore import as_color, quantize, rgb_to_luma


class Patch(NamedTuple):
    x: int
    y: int
    width: int
    height: int

    @classmethod
    def parse(cls, text: str) -> "Patch":
        parts = [int(t) for t in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"patch must be X,Y,W,H, got {text!r}")
        return cls(*parts)

    def slices(self):
        return slice(self.y, self.y + self.height), slice(self.x, self.x + self.width)


def histogram_equalize(img) -> np.ndarray:
    """Global per-channel equalization on 256 bins.

    Each 8-bit level maps to the fraction of pixels at or below it, so the
    highest occupied level always lands on 1.0.
    """
    codes = quantize(as_color(img))
    out = np.empty(codes.shape)
    for c in range(3):
        hist = np.bincount(codes[..., c].ravel(), minlength=256)
        cdf = np.cumsum(hist) / codes[..., c].size
        out[..., c] = cdf[codes[..., c]]
    return out


def mean_brightness(img) -> float:
    return float(rgb_to_luma(img).mean())


def flat_patch_noise_std(img, patch: Patch) -> float:
    """Population standard deviation of luma inside ``patch``."""
    img = as_color(img)
    h, w = img.shape[:2]
    if patch.x < 0 or patch.y < 0 or patch.x + patch.width > w or patch.y + patch.height > h:
        raise IndexError(f"patch {tuple(patch)} outside {w}x{h} image")
    if patch.width * patch.height < 4:
        raise ValueError(f"patch area must be >= 4, got {patch.width * patch.height}")
    return float(rgb_to_luma(img)[patch.slices()].std())


def find_flat_patch(img, size: int = 8) -> Patch:
    """Non-overlapping ``size``-square block with the lowest luma std.

    Ties go to the first block in row-major order. The block shrinks for
    images smaller than ``size``.
    """
    y = rgb_to_luma(img)
    h, w = y.shape
    size = min(size, h, w)
    best, best_std = Patch(0, 0, size, size), np.inf
    for i in range(0, h - size + 1, size):
        for j in range(0, w - size + 1, size):
            s = y[i:i + size, j:j + size].std()
            if s < best_std:
                best, best_std = Patch(j, i, size, size), s
    return best


def image_metrics(before, after, patch: Patch | None = None) -> dict:
    """Brightness and flat-patch noise before/after; ``None`` where undefined."""
    patch = patch or find_flat_patch(before)
    m_in, m_out = mean_brightness(before), mean_brightness(after)
    try:
        noise_in, noise_out = flat_patch_noise_std(before, patch), flat_patch_noise_std(after, patch)
    except ValueError:  # image too small for a 4-pixel patch
        noise_in = noise_out = None
    return {
        "mean_brightness_in": m_in,
        "mean_brightness_out": m_out,
        "brightness_gain": m_out / m_in if m_in > 0 else None,
        "noise_std_in": noise_in,
        "noise_std_out": noise_out,
        "patch": list(patch),
    }

