"""Wendland compactly supported radial kernels in the plane.

The profiles are the Wendland functions that are positive definite in
dimension 2 (they are valid up to dimension 3), normalised to ``Phi(0) = 1``:

==  ==========================================  ==========  ======  =====
m   profile on [0, 1]                           regularity  degree  tau
==  ==========================================  ==========  ======  =====
0   (1 - rho)^2                                 C^0         2       3/2
1   (1 - rho)^4 (4 rho + 1)                     C^2         5       5/2
2   (1 - rho)^6 (35 rho^2 + 18 rho + 3) / 3     C^4         8       7/2
==  ==========================================  ==========  ======  =====

A scaled basis function is ``Phi_r(x) = r**-2 * Phi(|x| / r)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

# Polynomial factor multiplying (1 - rho)^(2 + 2m), ascending coefficients.
_WENDLAND_FACTORS = {
    0: (1.0,),
    1: (1.0, 4.0),
    2: (3.0, 18.0, 35.0),
}


@dataclass(frozen=True)
class WendlandKernel:
    """Radial profile ``Phi`` with smoothness index ``m``.

    Attributes
    ----------
    m : int
        Smoothness index; the planar function is ``C^{2m}``.
    coeffs : np.ndarray
        Ascending coefficients of the univariate profile on ``[0, 1]``.
    """

    m: int
    coeffs: np.ndarray = field(repr=False, compare=False)

    @property
    def tau(self) -> Fraction:
        """Native-space (Sobolev) order ``3/2 + m``."""
        return Fraction(3, 2) + self.m

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def regularity(self) -> str:
        return f"C^{2 * self.m}"

    @property
    def dcoeffs(self) -> np.ndarray:
        return P.polyder(self.coeffs)


@lru_cache(maxsize=None)
def wendland(m: int) -> WendlandKernel:
    """Return the normalised Wendland kernel with smoothness index ``m``."""
    if m not in _WENDLAND_FACTORS:
        raise ValueError(f"smoothness index m must be 0, 1 or 2, got {m!r}")
    base = P.polypow([1.0, -1.0], 2 + 2 * m)
    coeffs = P.polymul(base, _WENDLAND_FACTORS[m])
    coeffs = coeffs / coeffs[0]
    coeffs.setflags(write=False)
    return WendlandKernel(m=m, coeffs=coeffs)


def profile_eval(kernel: WendlandKernel, rho):
    """Evaluate ``Phi(rho)``; identically zero for ``rho >= 1``."""
    rho = np.asarray(rho, dtype=float)
    val = P.polyval(rho, kernel.coeffs)
    return np.where(rho < 1.0, val, 0.0)


def profile_deriv(kernel: WendlandKernel, rho):
    """Radial derivative ``Phi'(rho)``, zero for ``rho >= 1``.

    For ``m = 0`` this is the interior one-sided value, so ``Phi'(0) = -2``.
    """
    rho = np.asarray(rho, dtype=float)
    val = P.polyval(rho, kernel.dcoeffs)
    return np.where(rho < 1.0, val, 0.0)


def profile_unit_integral(kernel: WendlandKernel) -> float:
    """Return ``int_{B(0,1)} Phi(|x|) dx = 2 pi int_0^1 rho Phi(rho) drho``.

    The value is shared by every scaled copy ``Phi_r``.
    """
    anti = P.polyint(P.polymul([0.0, 1.0], kernel.coeffs))
    return 2.0 * np.pi * float(P.polyval(1.0, anti))


def radial_antiderivative(kernel: WendlandKernel) -> np.ndarray:
    """Coefficients of ``t -> int_0^t s Phi(s) ds`` (valid for ``t <= 1``)."""
    return P.polyint(P.polymul([0.0, 1.0], kernel.coeffs))


@dataclass(frozen=True)
class ScaledRbf:
    """Basis function ``x -> Phi_r(x - center)`` with support radius ``r``."""

    kernel: WendlandKernel
    center: tuple
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("scale r must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))


def scaled_eval(rbf: ScaledRbf, x):
    """Evaluate the scaled RBF at points ``x`` of shape ``(..., 2)``."""
    x = np.asarray(x, dtype=float)
    d = np.hypot(x[..., 0] - rbf.center[0], x[..., 1] - rbf.center[1])
    return profile_eval(rbf.kernel, d / rbf.r) / rbf.r**2


def scaled_grad(rbf: ScaledRbf, x):
    """Gradient of the scaled RBF at points ``x`` of shape ``(..., 2)``.

    Returns ``r**-3 Phi'(d/r) (x - center)/d``; the zero vector at the centre
    and outside the support. For ``m = 0`` the gradient is discontinuous at
    the centre; the interior one-sided radial value is used elsewhere.
    """
    x = np.asarray(x, dtype=float)
    dx = x[..., 0] - rbf.center[0]
    dy = x[..., 1] - rbf.center[1]
    d = np.hypot(dx, dy)
    dphi = profile_deriv(rbf.kernel, d / rbf.r) / rbf.r**3
    ux, uy = unit_vectors(dx, dy, d)
    return np.stack([dphi * ux, dphi * uy], axis=-1)


def unit_vectors(dx, dy, d):
    """``(dx, dy) / d`` with zero where ``d == 0``; safe for subnormal ``d``."""
    safe = np.where(d > 0.0, d, 1.0)
    return np.where(d > 0.0, dx / safe, 0.0), np.where(d > 0.0, dy / safe, 0.0)


def h1_seminorm_sq_unit(kernel: WendlandKernel) -> float:
    """``|Phi|^2_{H^1(R^2)} = 2 pi int_0^1 rho Phi'(rho)^2 drho``."""
    d = kernel.dcoeffs
    anti = P.polyint(P.polymul([0.0, 1.0], P.polymul(d, d)))
    return 2.0 * np.pi * float(P.polyval(1.0, anti))
