"""Forward differences on the pixel grid and the weight fields built from them.

The horizontal axis is the column index (axis 1) and the vertical axis is the
row index (axis 0). Boundaries are replicated, so the last column of a
horizontal difference and the last row of a vertical one are zero.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .imagecore import as_plane


class Direction(enum.Enum):
    H = "h"
    V = "v"

    @property
    def axis(self) -> int:
        return 1 if self is Direction.H else 0


DIRECTIONS = (Direction.H, Direction.V)


def _direction(d) -> Direction:
    return d if isinstance(d, Direction) else Direction(d)


@dataclass(frozen=True)
class GradientPair:
    h: np.ndarray
    v: np.ndarray

    def __getitem__(self, d):
        return self.h if _direction(d) is Direction.H else self.v


@dataclass(frozen=True)
class IlluminationWeights:
    a_h: np.ndarray
    a_v: np.ndarray

    def __getitem__(self, d):
        return self.a_h if _direction(d) is Direction.H else self.a_v


@dataclass(frozen=True)
class ReflectanceWeights:
    w_h: np.ndarray
    w_v: np.ndarray

    def __getitem__(self, d):
        return self.w_h if _direction(d) is Direction.H else self.w_v


@dataclass(frozen=True)
class AdjustedGradient:
    g_h: np.ndarray
    g_v: np.ndarray

    def __getitem__(self, d):
        return self.g_h if _direction(d) is Direction.H else self.g_v


def forward_diff(p, d) -> np.ndarray:
    """``out(x) = p(x + e_d) - p(x)``, zero on the trailing boundary."""
    p = as_plane(p)
    out = np.zeros_like(p)
    if _direction(d) is Direction.H:
        out[:, :-1] = p[:, 1:] - p[:, :-1]
    else:
        out[:-1, :] = p[1:, :] - p[:-1, :]
    return out


def apply_div_transpose(q, d) -> np.ndarray:
    """Apply the transpose of :func:`forward_diff` without forming a matrix.

    Entries of ``q`` on the trailing boundary are ignored, since the
    corresponding rows of the difference matrix are zero.
    """
    q = as_plane(q)
    out = np.zeros_like(q)
    if _direction(d) is Direction.H:
        out[:, :-1] -= q[:, :-1]
        out[:, 1:] += q[:, :-1]
    else:
        out[:-1, :] -= q[:-1, :]
        out[1:, :] += q[:-1, :]
    return out


def gradient(p) -> GradientPair:
    return GradientPair(forward_diff(p, Direction.H), forward_diff(p, Direction.V))


def illumination_weights(l_hat, alpha: float, eps_stab: float) -> IlluminationWeights:
    """Smoothness weights ``alpha / (|grad_d l_hat| + eps_stab)`` per direction.

    These are the reweighting factors that turn the l1 gradient penalty on
    the illumination into a quadratic one.
    """
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not eps_stab > 0:
        raise ParameterError(f"eps_stab must be positive, got {eps_stab}")
    g = gradient(l_hat)
    return IlluminationWeights(
        alpha / (np.abs(g.h) + eps_stab),
        alpha / (np.abs(g.v) + eps_stab),
    )


def reflectance_weights(s_luma, eps_stab: float) -> ReflectanceWeights:
    """Edge-aware weights ``1 / (|grad_d s_luma| + eps_stab)``."""
    if not eps_stab > 0:
        raise ParameterError(f"eps_stab must be positive, got {eps_stab}")
    g = gradient(s_luma)
    return ReflectanceWeights(1.0 / (np.abs(g.h) + eps_stab), 1.0 / (np.abs(g.v) + eps_stab))


def _amplify(grad: np.ndarray, lam: float, sigma: float, eps_thresh: float) -> np.ndarray:
    kept = np.where(np.abs(grad) < eps_thresh, 0.0, grad)
    return (1.0 + lam * np.exp(-np.abs(kept) / sigma)) * kept


def adjusted_gradient(s_chan, lam: float, sigma: float, eps_thresh: float) -> AdjustedGradient:
    """Gradient target for the reflectance.

    Gradients with magnitude strictly below ``eps_thresh`` are zeroed; the
    survivors are scaled by ``1 + lam * exp(-|g| / sigma)``, which boosts
    weak edges more than strong ones.
    """
    if not lam >= 0:
        raise ParameterError(f"lambda must be nonnegative, got {lam}")
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if not eps_thresh >= 0:
        raise ParameterError(f"eps_thresh must be nonnegative, got {eps_thresh}")
    g = gradient(s_chan)
    return AdjustedGradient(
        _amplify(g.h, lam, sigma, eps_thresh),
        _amplify(g.v, lam, sigma, eps_thresh),
    )
