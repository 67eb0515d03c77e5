"""Error estimation by energy extrapolation, stability term and rates."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .assembly import RbfSpace
from .geometry import ExtensionMesh
from .quadrature import QuadConfig, polar_integrate
from .kernels import scaled_grad


class NonMonotone(ValueError):
    """Energies do not increase towards the limit as h decreases."""


class FitDiverged(RuntimeError):
    pass


@dataclass
class ConvergenceRecord:
    level: int
    n: int
    N: int
    M: int
    h: float
    r: float
    k: float
    energy: float
    rel_error: float = math.nan
    stab_term: float = math.nan
    eoc: float = math.nan
    h1_strip: float = math.nan
    flags: str = ""

    def as_row(self) -> dict:
        return asdict(self)


def compute_delta(eps: float, t: float, k: float, r: float) -> float:
    """``k^(1+t) r^(-3/2-eps) + k^(t-1/2-eps) (1 + k^(1+t) r^-(1+t))``."""
    if k <= 0 or r <= 0:
        raise ValueError("k and r must be positive")
    return k ** (1 + t) * r ** (-1.5 - eps) + k ** (t - 0.5 - eps) * (1.0 + k ** (1 + t) * r ** (-(1 + t)))


def expected_rate(tau) -> Fraction | float:
    """Expected energy-norm rate ``(1 - 1/tau) / 2``; exact for rational ``tau``."""
    if tau <= 1:
        raise ValueError("tau must exceed 1")
    if isinstance(tau, (Fraction, int)):
        return Fraction(1, 2) * (1 - 1 / Fraction(tau))
    return 0.5 * (1.0 - 1.0 / tau)


def eoc(errors, hs) -> list:
    """Rates ``log(e_j / e_{j+1}) / log(h_j / h_{j+1})`` between successive levels."""
    e = np.asarray(errors, dtype=float)
    h = np.asarray(hs, dtype=float)
    if e.shape != h.shape or e.size < 2:
        raise ValueError("need matching sequences of length >= 2")
    if np.any(e <= 0):
        raise ValueError("errors must be positive")
    if np.any(np.diff(h) >= 0):
        raise ValueError("h must be strictly decreasing")
    return [float(v) for v in np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])]


def fitted_rate(errors, hs) -> float:
    """Least-squares slope of ``log e`` against ``log h``."""
    slope, _ = np.polyfit(np.log(np.asarray(hs, float)), np.log(np.asarray(errors, float)), 1)
    return float(slope)


class RelativeError(NamedTuple):
    value: float
    overshoot: bool


def relative_error(energy: float, ex_energy: float) -> RelativeError:
    """``sqrt(ex - energy) / sqrt(ex)``.

    A negative radicand (extrapolated value below the computed energy) gives
    ``-sqrt(|radicand|) / sqrt(ex)`` with ``overshoot`` set.
    """
    if not ex_energy > 0:
        raise ValueError("extrapolated energy must be positive")
    rad = ex_energy - energy
    val = math.sqrt(abs(rad)) / math.sqrt(ex_energy)
    return RelativeError(-val if rad < 0 else val, rad < 0)


@dataclass(frozen=True)
class EnergyFit:
    limit: float
    coeff: float
    beta: float
    identifiable: bool = True


BETA_RANGE = (0.02, 12.0)


def _linear_part(gap, E, lh):
    """Least-squares ``(log C, beta)`` and residual norm for a trial limit."""
    y = np.log(E[-1] + gap - E)
    A = np.column_stack([np.ones_like(lh), lh])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    dev = y - y.mean()
    # 1 - R^2: scale-free, so letting the gap grow does not flatten the residual to zero
    return coef, float(res @ res) / max(float(dev @ dev), 1e-300)


def fit_energy_limit(energies, hs, min_levels: int = 3) -> EnergyFit:
    """Fit ``E(h) = E_inf - C h^beta`` over the levels given.

    The residual is taken on ``log(E_inf - E_j)``, which is linear in
    ``(log C, beta)`` for fixed ``E_inf``. The limit is located by a scan over
    ``log(E_inf - max E)`` of the normalised misfit ``1 - R^2``, seeded with
    Aitken's delta-squared value, then all three parameters are polished by
    Gauss-Newton (Levenberg-Marquardt).
    Fits whose exponent leaves ``BETA_RANGE`` are clamped to the range and
    marked not identifiable.
    """
    E = np.asarray(energies, dtype=float)
    h = np.asarray(hs, dtype=float)
    if E.size < min_levels or E.size != h.size:
        raise ValueError(f"need at least {min_levels} levels with matching h")
    order = np.argsort(-h)
    E, h = E[order], h[order]
    spread = float(E[-1] - E.min())
    if np.max(np.abs(E - E[-1])) <= 1e-14 * max(abs(E[-1]), 1e-300):
        return EnergyFit(float(E[-1]), 0.0, math.nan, identifiable=False)
    if np.any(np.diff(E) <= 0):
        raise NonMonotone(f"energies are not increasing as h decreases: {E.tolist()}")
    lh = np.log(h)
    Emax = E[-1]

    e1, e2, e3 = E[-3:]
    denom = (e3 - e2) - (e2 - e1)
    aitken_gap = -(e3 - e2) ** 2 / denom if denom < 0 else spread

    lo, hi = BETA_RANGE

    def objective(lg):
        coef, ss = _linear_part(math.exp(lg), E, lh)
        beta = coef[1]
        # penalise exponents outside the admissible range
        pen = max(lo - beta, 0.0, beta - hi)
        return ss + 1e3 * pen * pen

    grid = np.log(spread) + np.linspace(-25.0, 8.0, 661)
    vals = np.array([objective(g) for g in grid])
    g0 = grid[int(np.argmin(vals))]
    if objective(math.log(aitken_gap)) < objective(g0):
        g0 = math.log(aitken_gap)
    res = minimize_scalar(objective, bracket=(g0 - 0.05, g0 + 0.05), tol=1e-12)
    if res.success and res.fun <= objective(g0):
        g0 = float(res.x)
    coef, _ = _linear_part(math.exp(g0), E, lh)

    def resid(p):
        return np.log(Emax + math.exp(p[0]) - E) - p[1] - p[2] * lh

    x0 = np.array([g0, coef[0], coef[1]])
    ident = lo <= coef[1] <= hi
    if ident and E.size > 3:
        sol = least_squares(resid, x0=x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        if not np.all(np.isfinite(sol.x)):
            raise FitDiverged(sol.message)
        drift = abs(sol.x[0] - x0[0])
        if lo <= sol.x[2] <= hi and drift < math.log(4.0) and np.sum(sol.fun**2) <= np.sum(resid(x0) ** 2) + 1e-15:
            x0 = sol.x
    limit = Emax + math.exp(x0[0])
    if not math.isfinite(limit):
        raise FitDiverged("non-finite extrapolated energy")
    return EnergyFit(float(limit), float(math.exp(x0[1])), float(min(max(x0[2], lo), hi)), identifiable=bool(ident))


def extrapolate_energy(energies, hs, n_fit: int | None = None) -> float:
    """Extrapolated energy ``E_inf`` from the finest ``n_fit`` levels (all by default)."""
    E = list(energies)
    h = list(hs)
    if n_fit is not None:
        order = np.argsort(np.asarray(h))[:n_fit]
        E = [E[i] for i in order]
        h = [h[i] for i in order]
    return fit_energy_limit(E, h).limit


def h1_seminorm_strip(coeffs, space: RbfSpace, mesh: ExtensionMesh, cfg: QuadConfig = QuadConfig()) -> float:
    """``|phi_N|_{H^1(strip)}`` for ``phi_N = sum_i c_i phi_i``.

    Expands ``|grad phi_N|^2`` into pairwise terms and integrates each
    ``grad phi_i . grad phi_j`` over ``T ∩ supp phi_i ∩ supp phi_j`` in polar
    coordinates about ``x_i``, split at the other disc's rim and centre.
    """
    if space.kernel.m == 0:
        warnings.warn("H^1 seminorm of C^0 kernels is numerically delicate", RuntimeWarning)
    c = np.asarray(getattr(coeffs, "c", coeffs), dtype=float)
    X = space.centers
    r = space.r
    total = 0.0
    for cell in mesh.cells:
        x0, y0, x1, y1 = cell.box
        dx = np.maximum(np.maximum(x0 - X[:, 0], X[:, 0] - x1), 0.0)
        dy = np.maximum(np.maximum(y0 - X[:, 1], X[:, 1] - y1), 0.0)
        idx = np.flatnonzero((np.hypot(dx, dy) < r) & (c != 0.0))
        for a, i in enumerate(idx):
            bi = space.rbf(i)
            for j in idx[a:]:
                if np.hypot(*(X[i] - X[j])) >= 2 * r:
                    continue
                bj = space.rbf(j)

                def integrand(y, bi=bi, bj=bj):
                    gi = scaled_grad(bi, y)
                    gj = scaled_grad(bj, y)
                    return gi[..., 0] * gj[..., 0] + gi[..., 1] * gj[..., 1]

                if i == j:
                    val = polar_integrate(integrand, bi.center, r, cfg.outer[0], cfg.outer[1], box=cell.box)
                    total += c[i] * c[i] * val
                else:
                    val = polar_integrate(
                        integrand, bi.center, r, cfg.outer[0], cfg.outer[1], box=cell.box,
                        clip_disc=(bj.center, r), kink_points=[bj.center],
                    )
                    total += 2.0 * c[i] * c[j] * val
    return math.sqrt(max(total, 0.0))


def stability_term(h1_strip: float, k: float, r: float) -> float:
    """``delta(0, 1, k, r) |phi_N|_{H^1(strip)}``."""
    return compute_delta(0.0, 1.0, k, r) * h1_strip
