"""Sequential Retinex decomposition: illumination first, then reflectance.

The illumination is refined from its initial estimate alone and never sees
the reflectance, so noise that ends up in the reflectance cannot leak back
into it. The reflectance is then solved per RGB channel against the fixed,
normalized illumination.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, ShapeError
from .gradfield import (
    DIRECTIONS,
    adjusted_gradient,
    apply_div_transpose,
    forward_diff,
    illumination_weights,
    reflectance_weights,
)
from .imagecore import as_color, as_plane, rgb_to_luma
from .params import JedParams
from .spdsolve import SolveReport, WeightedLaplacianOperator, solve


@dataclass
class DecompositionResult:
    illumination: np.ndarray
    reflectance: np.ndarray
    reports: list[SolveReport] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.reports)


def illumination_operator(l_hat, params: JedParams) -> WeightedLaplacianOperator:
    a = illumination_weights(l_hat, params.alpha, params.eps_stab)
    return WeightedLaplacianOperator(a.a_h, a.a_v, 1.0)


def estimate_illumination(l_hat, params: JedParams):
    """Edge-preserving smoothing of the initial illumination.

    Returns the refined (unclamped) illumination and the solver report.
    """
    l_hat = as_plane(l_hat, "l_hat")
    if l_hat.size == 1:
        return l_hat.copy(), SolveReport(0, 0.0, True)
    op = illumination_operator(l_hat, params)
    # warm start at the data term: exact, zero-iteration solve for flat input
    return solve(op, l_hat, params.tol, params.max_iter, x0=l_hat)


def normalize_illumination(L, eps_div: float) -> np.ndarray:
    return np.clip(as_plane(L, "L"), eps_div, 1.0)


def reflectance_system(S, L, params: JedParams):
    """Build the shared reflectance operator and the three right-hand sides."""
    S = as_color(S, "S")
    L = as_plane(L, "L")
    if L.shape != S.shape[:2]:
        raise ShapeError(f"illumination {L.shape} does not match image {S.shape[:2]}")
    if np.any(L < params.eps_div):
        raise PreconditionError("illumination must be normalized (>= eps_div) before reflectance estimation")
    w = reflectance_weights(rgb_to_luma(S), params.eps_stab)
    op = WeightedLaplacianOperator(
        params.beta * w.w_h + params.omega,
        params.beta * w.w_v + params.omega,
        1.0,
    )
    rhs = []
    for c in range(3):
        g = adjusted_gradient(S[..., c], params.lam, params.sigma, params.eps_thresh)
        b = S[..., c] / L
        for d in DIRECTIONS:
            b = b + params.omega * apply_div_transpose(g[d], d)
        rhs.append(b)
    return op, rhs


def estimate_reflectance(S, L, params: JedParams):
    """Noise-suppressed reflectance for each channel, clamped to [0, 1].

    Returns ``(R, reports)`` with ``R`` shaped like ``S`` and one report per
    channel.
    """
    op, rhs = reflectance_system(S, L, params)
    channels, reports = [], []
    for b in rhs:
        r, rep = solve(op, b, params.tol, params.max_iter, x0=b)
        channels.append(np.clip(r, 0.0, 1.0))
        reports.append(rep)
    return np.stack(channels, axis=2), reports


def decompose(S, params: JedParams) -> DecompositionResult:
    """Run both stages; the returned illumination is the normalized one."""
    S = as_color(S, "S")
    L, rep_l = estimate_illumination(rgb_to_luma(S), params)
    L = normalize_illumination(L, params.eps_div)
    R, rep_r = estimate_reflectance(S, L, params)
    return DecompositionResult(L, R, [rep_l, *rep_r])


# -- objectives (used by tests to certify minimizers) ------------------------

def illumination_objective(L, l_hat, params: JedParams) -> float:
    a = illumination_weights(l_hat, params.alpha, params.eps_stab)
    val = np.sum((L - l_hat) ** 2)
    for d in DIRECTIONS:
        val += np.sum(a[d] * forward_diff(L, d) ** 2)
    return float(val)


def reflectance_objective(R_c, S, L, channel: int, params: JedParams) -> float:
    """Channel objective whose normal equations are the reflectance system.

    The smoothness term is weighted by ``w_d`` (not ``w_d**2``), matching the
    linear system that is actually solved.
    """
    S = as_color(S)
    w = reflectance_weights(rgb_to_luma(S), params.eps_stab)
    g = adjusted_gradient(S[..., channel], params.lam, params.sigma, params.eps_thresh)
    val = np.sum((R_c - S[..., channel] / L) ** 2)
    for d in DIRECTIONS:
        grad = forward_diff(R_c, d)
        val += params.beta * np.sum(w[d] * grad ** 2)
        val += params.omega * np.sum((grad - g[d]) ** 2)
    return float(val)
