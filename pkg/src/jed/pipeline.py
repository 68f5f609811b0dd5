"""End-to-end enhancement: luma, illumination, reflectance, recomposition."""
from __future__ import annotations

import warnings

import numpy as np

from .imagecore import as_color, as_plane
from .params import JedParams, default_params, load_config
from .retinex import DecompositionResult, decompose

__all__ = [
    "ConvergenceWarning",
    "JedParams",
    "default_params",
    "enhance",
    "enhance_without_smoothing",
    "gamma_correct",
    "load_config",
    "recompose",
]


class ConvergenceWarning(RuntimeWarning):
    pass


def gamma_correct(L_norm, gamma: float) -> np.ndarray:
    return np.power(as_plane(L_norm, "L_norm"), 1.0 / gamma)


def recompose(result: DecompositionResult, gamma: float) -> np.ndarray:
    """``clamp(R * L'^(1/gamma))`` from a decomposition."""
    lg = gamma_correct(result.illumination, gamma)
    return np.clip(result.reflectance * lg[:, :, None], 0.0, 1.0)


def enhance(S, params: JedParams | None = None):
    """Brighten and denoise a low-light image.

    Returns ``(enhanced, decomposition)``. If any solve fails to converge the
    output is still built from the best iterates and a
    :class:`ConvergenceWarning` is emitted; ``decomposition.converged``
    reports the same thing.
    """
    params = params or default_params()
    S = as_color(S, "S")
    result = decompose(S, params)
    if not result.converged:
        warnings.warn(
            "solver did not converge; result built from best iterates", ConvergenceWarning, stacklevel=2
        )
    return recompose(result, params.gamma), result


def enhance_without_smoothing(S, L_norm, gamma: float) -> np.ndarray:
    """Baseline recomposition ``clamp((S / L') * L'^(1/gamma))`` with no reflectance solve."""
    S = as_color(S, "S")
    L_norm = as_plane(L_norm, "L_norm")
    R = S / L_norm[:, :, None]
    return np.clip(R * gamma_correct(L_norm, gamma)[:, :, None], 0.0, 1.0)
