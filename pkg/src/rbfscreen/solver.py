"""Direct solution of the saddle-point system."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, svdvals

from .assembly import SaddleSystem

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-9
DEFAULT_COND_BOUND = 1e14


class RankDeficient(np.linalg.LinAlgError):
    """The coupling matrix B has numerical rank below its row count."""


class IllConditioned(UserWarning):
    pass


@dataclass
class DiscreteSolution:
    """Coefficients ``c`` of ``phi_N`` and cellwise multiplier values ``lam``.

    ``residual_w`` and ``residual_b`` are the relative block residuals,
    ``constraint_norm`` is ``||B c||_inf``.
    """

    c: np.ndarray
    lam: np.ndarray
    residual_w: float
    residual_b: float
    constraint_norm: float
    rcond: float

    def energy(self, W: np.ndarray) -> float:
        return float(self.c @ W @ self.c)


def numerical_rank(B: np.ndarray) -> int:
    if B.size == 0:
        return 0
    s = svdvals(B)
    tol = max(B.shape) * np.finfo(float).eps * s[0]
    return int(np.sum(s > tol))


def solve_saddle(system: SaddleSystem, cond_bound: float = DEFAULT_COND_BOUND) -> DiscreteSolution:
    """Solve ``W c - B^T lam = f``, ``B c = 0`` by symmetric-indefinite LDL^T.

    The symmetric form ``[[W, B^T], [B, 0]]`` in ``(c, -lam)`` is factorised
    with Bunch-Kaufman pivoting (LAPACK ``sytrf``); one step of iterative
    refinement is taken if the block residuals exceed ``1e-9`` relative.

    Raises
    ------
    RankDeficient
        If ``B`` has numerical rank below its number of rows.
    """
    W, B, f = system.W, system.B, system.f
    N, M = W.shape[0], B.shape[0]
    if M and numerical_rank(B) < M:
        raise RankDeficient(f"coupling matrix has rank {numerical_rank(B)} < {M} rows")
    K = np.zeros((N + M, N + M))
    K[:N, :N] = W
    K[N:, :N] = B
    K[:N, N:] = B.T
    rhs = np.concatenate([f, np.zeros(M)])

    lu, ipiv, info = lapack.dsytrf(K, lower=1)
    if info > 0:
        raise np.linalg.LinAlgError(f"singular saddle-point matrix (sytrf info={info})")
    anorm = np.max(np.sum(np.abs(K), axis=0))
    rcond, _ = lapack.dsycon(lu, ipiv, anorm, lower=1)
    if rcond * cond_bound < 1.0:
        warnings.warn(f"saddle-point matrix condition estimate {1.0 / max(rcond, 1e-300):.2e}", IllConditioned)

    def _solve(b):
        x, info = lapack.dsytrs(lu, ipiv, b, lower=1)
        if info:
            raise np.linalg.LinAlgError(f"sytrs failed (info={info})")
        return x

    x = _solve(rhs)
    rw, rb = _residuals(W, B, f, x, N)
    if rw > RESIDUAL_TOL or rb > RESIDUAL_TOL:
        x = x + _solve(rhs - K @ x)
        rw, rb = _residuals(W, B, f, x, N)
    if rw > RESIDUAL_TOL or rb > RESIDUAL_TOL:
        logger.warning("block residuals %.2e / %.2e above tolerance", rw, rb)
    c = x[:N]
    return DiscreteSolution(
        c=c, lam=-x[N:], residual_w=rw, residual_b=rb,
        constraint_norm=float(np.max(np.abs(B @ c), initial=0.0)), rcond=float(rcond),
    )


def _residuals(W, B, f, x, N):
    c, mu = x[:N], x[N:]
    r1 = W @ c + B.T @ mu - f
    scale1 = np.max(np.abs(W @ c), initial=0.0) + np.max(np.abs(f), initial=0.0)
    rw = float(np.max(np.abs(r1), initial=0.0) / scale1) if scale1 > 0 else 0.0
    bc = B @ c
    scale2 = np.max(np.abs(B), initial=0.0) * np.max(np.abs(c), initial=0.0)
    rb = float(np.max(np.abs(bc), initial=0.0) / scale2) if scale2 > 0 else 0.0
    return rw, rb


def inf_sup_diagnostic(system: SaddleSystem) -> float:
    """Smallest singular value of ``B diag(W)^{-1/2}`` (on demand only)."""
    d = np.sqrt(np.diag(system.W))
    s = svdvals(system.B / d[None, :])
    return float(s[-1]) if s.size else float("nan")
