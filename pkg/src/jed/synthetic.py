"""Fixed-seed synthetic low-light scenes with known flat regions and edges."""
from __future__ import annotations

import numpy as np

from .imagecore import rgb_to_luma
from .metrics import Patch

SIZE = 64
DARK, BRIGHT = 0.05, 0.45
EDGE_COL = 32
# 16x16 uniform block inside the bright half, clear of every edge
FLAT_PATCH = Patch(x=40, y=4, width=16, height=16)
EDGE_ROWS = slice(4, 36)


def clean_scene(size: int = SIZE) -> np.ndarray:
    """Piecewise-constant scene: dark left half, gray right half, red block."""
    img = np.empty((size, size, 3))
    img[:, : size // 2] = DARK
    img[:, size // 2:] = BRIGHT
    img[size * 5 // 8: size * 7 // 8, size // 8: size * 3 // 8] = [0.8, 0.3, 0.2]
    return img


def dark_noisy_scene(seed: int = 7, exposure: float = 0.2, noise: float = 0.02, size: int = SIZE):
    """Return ``(clean, observed)`` where observed = clip(clean * exposure + N(0, noise))."""
    clean = clean_scene(size)
    rng = np.random.default_rng(seed)
    observed = np.clip(clean * exposure + rng.normal(0.0, noise, clean.shape), 0.0, 1.0)
    return clean, observed


def edge_magnitude(img, rows=EDGE_ROWS, col: int = EDGE_COL, band: int = 3) -> float:
    """Mean luma step across the vertical edge at ``col``, averaged over a band."""
    y = rgb_to_luma(img) if np.ndim(img) == 3 else np.asarray(img)
    return float(abs(y[rows, col:col + band].mean() - y[rows, col - band:col].mean()))
