"""RBF interpolation on the screen, used to check approximation rates apart from the solver."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, lapack

from .assembly import RbfSpace
from .geometry import NodeSet
from .kernels import profile_eval
from .quadrature import gauss_rule
from .solver import IllConditioned

DEFAULT_COND_BOUND = 1e12
_CHUNK = 4096


@dataclass(frozen=True)
class InterpolationProblem:
    space: RbfSpace
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.space.N,):
            raise ValueError(f"need one sample per node ({self.space.N}), got shape {s.shape}")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, space: RbfSpace, target) -> "InterpolationProblem":
        return cls(space, np.asarray(target(space.centers), dtype=float))


def kernel_matrix(space: RbfSpace, points, centers=None) -> np.ndarray:
    """``[Phi_r(p_a - x_j)]`` for evaluation points ``p_a`` and centres ``x_j``."""
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    X = space.centers if centers is None else np.asarray(centers, dtype=float)
    d = np.hypot(P[:, None, 0] - X[None, :, 0], P[:, None, 1] - X[None, :, 1])
    return profile_eval(space.kernel, d / space.r) / space.r**2


def gram_matrix(space: RbfSpace) -> np.ndarray:
    A = kernel_matrix(space, space.centers)
    return 0.5 * (A + A.T)


def interpolate(problem: InterpolationProblem, cond_bound: float = DEFAULT_COND_BOUND) -> np.ndarray:
    """Coefficients ``a`` with ``sum_j a_j Phi_r(x_i - x_j) = v(x_i)``.

    Cholesky on the Gram matrix; warns with :class:`IllConditioned` when the
    LAPACK condition estimate exceeds ``cond_bound``.
    """
    pts = problem.space.centers
    if len(np.unique(np.round(pts, 14), axis=0)) != len(pts):
        raise ValueError("interpolation nodes must be distinct")
    A = gram_matrix(problem.space)
    if not np.any(problem.samples):
        return np.zeros(problem.space.N)
    factor = cho_factor(A, lower=True)
    rcond, info = lapack.dpocon(factor[0], np.max(np.sum(np.abs(A), axis=0)), uplo="L")
    if info == 0 and rcond * cond_bound < 1.0:
        warnings.warn(f"Gram matrix condition estimate {1.0 / max(rcond, 1e-300):.2e}", IllConditioned)
    return cho_solve(factor, problem.samples)


def evaluate(space: RbfSpace, coeffs, points) -> np.ndarray:
    """Interpolant ``sum_j a_j Phi_r(. - x_j)`` at ``points`` of shape ``(..., 2)``.

    Points are processed in chunks sorted along ``x``; each chunk only sees
    the centres within ``r`` of its bounding box.
    """
    P = np.asarray(points, dtype=float)
    flat = P.reshape(-1, 2)
    a = np.asarray(coeffs, dtype=float)
    X = space.centers
    order = np.lexsort((flat[:, 1], flat[:, 0]))
    out = np.empty(len(flat))
    for s in range(0, len(flat), _CHUNK):
        idx = order[s:s + _CHUNK]
        chunk = flat[idx]
        lo, hi = chunk.min(axis=0) - space.r, chunk.max(axis=0) + space.r
        near = np.flatnonzero(np.all((X >= lo) & (X <= hi), axis=1))
        out[idx] = kernel_matrix(space, chunk, X[near]) @ a[near]
    return out.reshape(P.shape[:-1])


def quadrature_grid(cells_per_side: int, n_quad: int):
    """Tensor Gauss points and weights on a uniform partition of the unit square."""
    g = gauss_rule(n_quad)
    edges = np.arange(cells_per_side + 1) / cells_per_side
    x, w = g.on(edges[:-1, None], edges[1:, None])
    x, w = x.ravel(), w.ravel()
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    return np.stack([X, Y], axis=-1).reshape(-1, 2), W.ravel()


def l2_error(space: RbfSpace, coeffs, target, n_quad: int = 6, cells_per_side: int | None = None) -> float:
    """``||target - interpolant||_{L2(Gamma)}``.

    The partition is uniform with cell side below ``min(r, h)``; ``h`` is the
    node spacing (taken from a uniform grid if available).
    """
    if cells_per_side is None:
        scale = space.r
        nodes: NodeSet = space.nodes
        if nodes.n_per_side is not None:
            scale = min(scale, 1.0 / nodes.n_per_side)
        cells_per_side = int(math.floor(1.0 / scale)) + 1
    pts, w = quadrature_grid(cells_per_side, n_quad)
    diff = np.asarray(target(pts), dtype=float) - evaluate(space, coeffs, pts)
    return float(math.sqrt(max(np.dot(w, diff * diff), 0.0)))


def gaussian_bump(center=(0.4, 0.55), width: float = 0.3):
    c = np.asarray(center, dtype=float)

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-np.sum((x - c) ** 2, axis=-1) / width**2)

    return f
