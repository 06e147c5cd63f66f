"""Screened Poisson solve blending voted colors with target gradients.

Per channel this minimizes ||J - v||^2 + lambda * ||grad(J) - g||^2 over
the image grid, i.e. solves the SPD system

    (I + lambda * G^T G) J = v + lambda * G^T g

where G stacks the forward-difference operators of image.gradients and
G^T G is the 5-point Laplacian with zero-flux (Neumann) boundaries.
Solved matrix-free with Jacobi-preconditioned conjugate gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_LAMBDA = 5.0
DEFAULT_TOL = 1e-8
MAX_ITERATIONS = 10_000


class PoissonConvergenceError(RuntimeError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(f"screened Poisson solve stalled at relative residual "
                         f"{residual:.3e} after {iterations} iterations")
        self.residual = residual
        self.iterations = iterations


@dataclass
class ScreenedPoissonProblem:
    data_term: np.ndarray            # voted colors v, (H, W, C)
    gradient_target: tuple[np.ndarray, np.ndarray]  # (gx, gy), each (H, W, C)
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        gx, gy = self.gradient_target
        if gx.shape != self.data_term.shape or gy.shape != self.data_term.shape:
            raise ValueError("gradient target must match the data term's shape")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")


def _grad_adjoint(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """G^T applied to a gradient-field pair (the negative divergence)."""
    out = np.zeros_like(gx)
    out[:, 1:] += gx[:, :-1]
    out[:, :-1] -= gx[:, :-1]
    out[1:, :] += gy[:-1, :]
    out[:-1, :] -= gy[:-1, :]
    return out


def _apply_operator(x: np.ndarray, lam: float) -> np.ndarray:
    dx = np.zeros_like(x)
    dy = np.zeros_like(x)
    dx[:, :-1] = x[:, 1:] - x[:, :-1]
    dy[:-1, :] = x[1:, :] - x[:-1, :]
    return x + lam * _grad_adjoint(dx, dy)


def _jacobi_diagonal(shape: tuple[int, int], lam: float) -> np.ndarray:
    h, w = shape
    deg_x = np.ones(w)
    deg_x[1:-1] = 2.0
    if w == 1:
        deg_x[:] = 0.0
    deg_y = np.ones(h)
    deg_y[1:-1] = 2.0
    if h == 1:
        deg_y[:] = 0.0
    return 1.0 + lam * (deg_x[None, :] + deg_y[:, None])


def solve_screened_poisson(problem: ScreenedPoissonProblem, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Solve each channel to relative residual <= tol. lambda = 0 returns
    the data term as-is."""
    if tol <= 0:
        raise ValueError("tol must be > 0")
    v = problem.data_term
    if problem.lam == 0.0:
        return v.copy()
    gx, gy = problem.gradient_target
    out = np.empty_like(v, dtype=np.float64)
    for c in range(v.shape[2]):
        rhs = v[:, :, c] + problem.lam * _grad_adjoint(gx[:, :, c], gy[:, :, c])
        out[:, :, c] = _cg(rhs, problem.lam, x0=v[:, :, c].astype(np.float64), tol=tol)
    return out


def _cg(rhs: np.ndarray, lam: float, x0: np.ndarray, tol: float) -> np.ndarray:
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros_like(rhs)
    inv_diag = 1.0 / _jacobi_diagonal(rhs.shape, lam)
    x = x0.copy()
    r = rhs - _apply_operator(x, lam)
    z = r * inv_diag
    p = z.copy()
    rz = float((r * z).sum())
    res = float(np.linalg.norm(r))
    for it in range(MAX_ITERATIONS):
        if res <= tol * rhs_norm:
            return x
        ap = _apply_operator(p, lam)
        alpha = rz / float((p * ap).sum())
        x += alpha * p
        r -= alpha * ap
        res = float(np.linalg.norm(r))
        z = r * inv_diag
        rz_new = float((r * z).sum())
        p = z + (rz_new / rz) * p
        rz = rz_new
    if res <= tol * rhs_norm:
        return x
    raise PoissonConvergenceError(res / rhs_norm, MAX_ITERATIONS)
