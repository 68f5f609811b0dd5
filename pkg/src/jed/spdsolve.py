"""Matrix-free weighted Laplacian systems and a Jacobi-preconditioned CG solver.

Both estimation stages reduce to ``(c I + sum_d D_d^T Diag(w_d) D_d) x = b``
with nonnegative per-pixel weights ``w_d``. The operator is applied in O(N)
with slicing; :func:`assemble_dense` builds the same matrix explicitly and is
only meant as a test oracle on small grids.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParameterError, ShapeError
from .gradfield import Direction, apply_div_transpose, forward_diff
from .imagecore import as_plane

log = logging.getLogger(__name__)

DENSE_GUARD = 4096


@dataclass(frozen=True)
class WeightedLaplacianOperator:
    weights_h: np.ndarray
    weights_v: np.ndarray
    identity_coeff: float = 1.0

    def __post_init__(self):
        wh = as_plane(self.weights_h, "weights_h")
        wv = as_plane(self.weights_v, "weights_v")
        if wh.shape != wv.shape:
            raise ShapeError(f"weight planes differ in shape: {wh.shape} vs {wv.shape}")
        if np.any(wh < 0) or np.any(wv < 0):
            raise ParameterError("operator weights must be nonnegative")
        if not self.identity_coeff > 0:
            raise ParameterError(f"identity coefficient must be positive, got {self.identity_coeff}")
        object.__setattr__(self, "weights_h", wh)
        object.__setattr__(self, "weights_v", wv)

    @property
    def shape(self):
        return self.weights_h.shape

    def weights(self, d):
        return self.weights_h if Direction(d) is Direction.H else self.weights_v

    def diagonal(self) -> np.ndarray:
        """Closed-form diagonal of the operator, used for Jacobi preconditioning."""
        diag = np.full(self.shape, float(self.identity_coeff))
        # a weight on the trailing boundary multiplies an all-zero row of D
        wh = self.weights_h[:, :-1]
        diag[:, :-1] += wh
        diag[:, 1:] += wh
        wv = self.weights_v[:-1, :]
        diag[:-1, :] += wv
        diag[1:, :] += wv
        return diag

    def __matmul__(self, x):
        return apply(self, x)


@dataclass
class SolveReport:
    iterations: int
    residual: float
    converged: bool

    def to_dict(self) -> dict:
        return {"iterations": self.iterations, "residual": self.residual, "converged": self.converged}


def apply(op: WeightedLaplacianOperator, x) -> np.ndarray:
    x = as_plane(x, "x")
    if x.shape != op.shape:
        raise ShapeError(f"x has shape {x.shape}, operator expects {op.shape}")
    out = op.identity_coeff * x
    for d in (Direction.H, Direction.V):
        out += apply_div_transpose(op.weights(d) * forward_diff(x, d), d)
    return out


def solve(op: WeightedLaplacianOperator, rhs, tol: float = 1e-5, max_iter: int = 1000, x0=None):
    """Solve ``op @ x = rhs`` by preconditioned conjugate gradients.

    Stops once ``||rhs - op @ x|| / ||rhs|| <= tol``, checked against the
    recomputed (not recursively updated) residual. If ``max_iter`` runs out,
    the iterate with the smallest residual seen is returned with
    ``converged=False``.

    Returns ``(x, SolveReport)``.
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    if not np.all(np.isfinite(rhs)):
        raise NumericalError("right-hand side contains NaN or Inf")
    rhs = as_plane(rhs, "rhs")
    if rhs.shape != op.shape:
        raise ShapeError(f"rhs has shape {rhs.shape}, operator expects {op.shape}")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if max_iter < 0:
        raise ParameterError(f"max_iter must be nonnegative, got {max_iter}")

    b_norm = np.linalg.norm(rhs)
    if b_norm == 0.0:
        return np.zeros_like(rhs), SolveReport(0, 0.0, True)

    inv_diag = 1.0 / op.diagonal()
    x = np.zeros_like(rhs) if x0 is None else as_plane(x0, "x0").copy()
    if x.shape != op.shape:
        raise ShapeError(f"x0 has shape {x.shape}, operator expects {op.shape}")

    r = rhs - apply(op, x)
    res = np.linalg.norm(r) / b_norm
    best_x, best_res = x.copy(), res
    if res <= tol:
        return x, SolveReport(0, float(res), True)

    z = inv_diag * r
    p = z.copy()
    rz = np.vdot(r, z)
    it = 0
    while it < max_iter:
        it += 1
        q = apply(op, p)
        pq = np.vdot(p, q)
        if not np.isfinite(pq) or pq <= 0:
            raise NumericalError(f"CG breakdown at iteration {it}: p.Ap = {pq}")
        step = rz / pq
        x += step * p
        r -= step * q
        res = np.linalg.norm(r) / b_norm
        if not np.isfinite(res):
            raise NumericalError(f"non-finite residual at iteration {it}")
        if res <= tol:
            r = rhs - apply(op, x)
            res = np.linalg.norm(r) / b_norm
            if res <= tol:
                return x, SolveReport(it, float(res), True)
            # recursive residual drifted: restart from the true one
            z = inv_diag * r
            p = z.copy()
            rz = np.vdot(r, z)
            continue
        if res < best_res:
            best_x, best_res = x.copy(), res
        z = inv_diag * r
        rz_new = np.vdot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new

    true_res = np.linalg.norm(rhs - apply(op, x)) / b_norm
    if true_res < best_res:
        best_x, best_res = x, true_res
    log.warning("CG did not converge in %d iterations (residual %.3g)", max_iter, best_res)
    return best_x, SolveReport(it, float(best_res), False)


def difference_matrix(height: int, width: int, d) -> np.ndarray:
    """Dense forward-difference matrix acting on row-major vectorized planes."""
    n = height * width
    D = np.zeros((n, n))
    for i in range(height):
        for j in range(width):
            k = i * width + j
            if Direction(d) is Direction.H and j + 1 < width:
                D[k, k], D[k, k + 1] = -1.0, 1.0
            elif Direction(d) is Direction.V and i + 1 < height:
                D[k, k], D[k, k + width] = -1.0, 1.0
    return D


def assemble_dense(op: WeightedLaplacianOperator) -> np.ndarray:
    """Explicit ``c I + sum_d D_d^T Diag(w_d) D_d``; test oracle only."""
    h, w = op.shape
    n = h * w
    if n > DENSE_GUARD:
        raise ValueError(f"dense assembly refused for {n} unknowns (guard is {DENSE_GUARD})")
    A = op.identity_coeff * np.eye(n)
    for d in (Direction.H, Direction.V):
        D = difference_matrix(h, w, d)
        A += D.T @ (op.weights(d).ravel()[:, None] * D)
    return A
