"""Diagnostic figures written next to CLI outputs."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .imagecore import rgb_to_luma  # noqa: E402

PANEL_RC = {
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 8,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "savefig.dpi": 120,
}


def _show(ax, img, title):
    if img.ndim == 2:
        ax.imshow(img, cmap="gray", vmin=0.0, vmax=1.0, interpolation="nearest")
    else:
        ax.imshow(np.clip(img, 0.0, 1.0), interpolation="nearest")
    ax.set_title(title)
    ax.set_axis_off()


def save_enhancement_figure(path, observed, enhanced, illumination=None, reflectance=None, title=None):
    """Image panels plus before/after luma histograms, saved as PNG.

    ``illumination`` and ``reflectance`` are drawn when given, so the same
    layout serves both the full method and the histogram-equalization
    baseline.
    """
    panels = [(observed, "input")]
    if illumination is not None:
        panels.append((illumination, "illumination"))
    if reflectance is not None:
        panels.append((reflectance, "reflectance"))
    panels.append((enhanced, "output"))

    with plt.rc_context(PANEL_RC):
        n = len(panels) + 1
        fig, axes = plt.subplots(1, n, figsize=(2.4 * n, 2.6))
        for ax, (img, label) in zip(axes, panels):
            _show(ax, img, label)
        hax = axes[-1]
        bins = np.linspace(0.0, 1.0, 65)
        hax.hist(rgb_to_luma(observed).ravel(), bins=bins, histtype="step", color="0.4", label="input")
        hax.hist(rgb_to_luma(enhanced).ravel(), bins=bins, histtype="step", color="C3", label="output")
        hax.set_xlim(0.0, 1.0)
        hax.set_xlabel("luma")
        hax.set_yticks([])
        hax.legend(frameon=False, loc="upper right")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path, format="png", metadata={"Software": None})
        plt.close(fig)
