"""Quadrature on squares and discs, including the weakly singular 1/|x-y| kernel.

Galerkin entries of the hypersingular operator on the flat screen are computed
from the equivalent weakly singular form

    <W phi_j, phi_i> = 1/(4 pi) int int grad phi_i(x) . grad phi_j(y) / |x - y| dy dx.

The inner integral ``V_j(x) = int grad phi_j(y) / |x - y| dy`` is the gradient of
a radial potential, so ``V_j(x) = r**-2 v(|x - c_j| / r) (x - c_j) / |x - c_j|``
for a single univariate profile ``v`` per kernel. :class:`InnerPotential`
tabulates ``v`` (every sample is an :func:`inner_singular` evaluation) and the
outer integral is done in polar coordinates about ``c_i`` with breakpoints at
every place the integrand loses smoothness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import legendre

from .kernels import ScaledRbf, WendlandKernel, profile_deriv, scaled_grad, unit_vectors

TWO_PI = 2.0 * np.pi
_ANGLE_TOL = 1e-13


@dataclass(frozen=True)
class GaussRule:
    """Gauss-Legendre rule on ``[-1, 1]``."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray

    def on(self, a, b):
        """Nodes and weights mapped to ``[a, b]`` (broadcasts over arrays)."""
        a = np.asarray(a, dtype=float)[..., None]
        b = np.asarray(b, dtype=float)[..., None]
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


@lru_cache(maxsize=None)
def gauss_rule(n: int) -> GaussRule:
    """Return the ``n``-point Gauss-Legendre rule, ``1 <= n <= 64``."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 64:
        raise ValueError(f"Gauss order must be an integer in [1, 64], got {n!r}")
    x, w = legendre.leggauss(int(n))
    x.setflags(write=False)
    w.setflags(write=False)
    return GaussRule(int(n), x, w)


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature orders.

    ``outer`` and ``inner`` are ``(n_rho, n_theta)`` per polar panel;
    ``profile_degree`` is the Chebyshev degree per panel of the inner potential.
    """

    outer: tuple = (16, 16)
    inner: tuple = (16, 24)
    profile_degree: int = 24
    cell: int = 16

    def scaled(self, factor: float) -> "QuadConfig":
        def s(n):
            return min(64, max(1, int(round(n * factor))))

        return QuadConfig(
            outer=tuple(s(n) for n in self.outer),
            inner=tuple(s(n) for n in self.inner),
            profile_degree=s(self.profile_degree),
            cell=s(self.cell),
        )


def integrate_square(f, cell, n: int = 16) -> float:
    """Tensor Gauss rule for ``f`` over the box ``(x0, y0, x1, y1)``.

    ``f`` takes an array of points of shape ``(..., 2)``.
    """
    x0, y0, x1, y1 = cell
    rule = gauss_rule(n)
    xs, wx = rule.on(x0, x1)
    ys, wy = rule.on(y0, y1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vals = np.asarray(f(np.stack([X, Y], axis=-1)), dtype=float)
    return float(np.einsum("i,j,ij->", wx, wy, vals))


# ---------------------------------------------------------------------------
# Elementary ray geometry
# ---------------------------------------------------------------------------
def _ray_box(cx, cy, ox, oy, box):
    """Parameter interval of the ray ``c + t o`` inside ``box`` (t may be < 0)."""
    x0, y0, x1, y1 = box
    lo = np.full(np.shape(ox), -np.inf)
    hi = np.full(np.shape(ox), np.inf)
    for c, o, a, b in ((cx, ox, x0, x1), (cy, oy, y0, y1)):
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (a - c) / o
            t2 = (b - c) / o
        par = np.abs(o) < 1e-300
        inside = (a <= c) & (c <= b)
        tmin = np.where(par, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
        tmax = np.where(par, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
        lo = np.maximum(lo, tmin)
        hi = np.minimum(hi, tmax)
    return lo, hi


def _ray_circle(cx, cy, ox, oy, q, R):
    """Roots ``t1 <= t2`` of ``|c + t o - q| = R``; NaN where the ray misses."""
    px, py = cx - q[0], cy - q[1]
    b = px * ox + py * oy
    disc = b * b - (px * px + py * py - R * R)
    s = np.sqrt(np.where(disc >= 0.0, disc, np.nan))
    return -b - s, -b + s


def _circle_circle_points(c1, R1, c2, R2):
    dx, dy = c2[0] - c1[0], c2[1] - c1[1]
    d = math.hypot(dx, dy)
    if d == 0.0 or d > R1 + R2 or d < abs(R1 - R2):
        return []
    a = (R1 * R1 - R2 * R2 + d * d) / (2.0 * d)
    h = math.sqrt(max(R1 * R1 - a * a, 0.0))
    mx, my = c1[0] + a * dx / d, c1[1] + a * dy / d
    return [(mx - h * dy / d, my + h * dx / d), (mx + h * dy / d, my - h * dx / d)]


def _circle_box_line_points(q, R, box):
    x0, y0, x1, y1 = box
    pts = []
    for xv in (x0, x1):
        dx = xv - q[0]
        if abs(dx) <= R:
            s = math.sqrt(R * R - dx * dx)
            pts += [(xv, q[1] - s), (xv, q[1] + s)]
    for yv in (y0, y1):
        dy = yv - q[1]
        if abs(dy) <= R:
            s = math.sqrt(R * R - dy * dy)
            pts += [(q[0] - s, yv), (q[0] + s, yv)]
    return pts


def _direction(c, p):
    dx, dy = p[0] - c[0], p[1] - c[1]
    if math.hypot(dx, dy) < 1e-15:
        return None
    return math.atan2(dy, dx)


def _angular_panels(angles):
    """Sorted panel edges covering one full turn, starting at the first break."""
    a = np.mod(np.asarray([t for t in angles if t is not None], dtype=float), TWO_PI)
    if a.size == 0:
        return np.array([0.0, np.pi, TWO_PI])
    a = np.sort(a)
    keep = np.concatenate([[True], np.diff(a) > _ANGLE_TOL])
    a = a[keep]
    if a.size > 1 and a[-1] - a[0] > TWO_PI - _ANGLE_TOL:
        a = a[:-1]
    edges = np.concatenate([a, [a[0] + TWO_PI]])
    if edges.size == 2:
        edges = np.array([a[0], a[0] + np.pi, a[0] + TWO_PI])
    return edges


def _smooth_map(rule: GaussRule, a, b):
    """Gauss points on panels ``[a, b]`` under the cubic map ``3u^2 - 2u^3``.

    The map has vanishing derivative at both panel ends, which absorbs
    square-root behaviour at tangent directions.
    """
    u = 0.5 * (rule.nodes + 1.0)
    wu = 0.5 * rule.weights
    s = u * u * (3.0 - 2.0 * u)
    ds = 6.0 * u * (1.0 - u)
    a = np.asarray(a, dtype=float)[:, None]
    b = np.asarray(b, dtype=float)[:, None]
    return (a + (b - a) * s).ravel(), ((b - a) * ds * wu).ravel()


# ---------------------------------------------------------------------------
# Polar integration with geometric breakpoints
# ---------------------------------------------------------------------------
def polar_integrate(
    func,
    center,
    R: float,
    n_rho: int = 16,
    n_theta: int = 16,
    box=None,
    clip_disc=None,
    kink_circles=(),
    kink_points=(),
) -> float:
    """Integrate ``func`` over ``B(center, R)`` (optionally intersected).

    Parameters
    ----------
    func : callable
        Maps points of shape ``(..., 2)`` to values of shape ``(...)``.
    box : tuple, optional
        Axis-aligned box ``(x0, y0, x1, y1)`` the region is clipped to.
    clip_disc : tuple, optional
        ``(q, R2)``; the region is clipped to ``B(q, R2)``.
    kink_circles, kink_points
        Curves and points across which ``func`` is not smooth; the polar
        panels are split there.

    Notes
    -----
    Polar coordinates are centred at ``center``; each angular panel has a
    fixed combinatorial structure, so the radial limits and breakpoints are
    smooth in the angle and tensor Gauss rules converge rapidly.
    """
    c = (float(center[0]), float(center[1]))
    circles = list(kink_circles)
    if clip_disc is not None:
        circles.append(clip_disc)

    angles = []
    if box is not None:
        x0, y0, x1, y1 = box
        for p in ((x0, y0), (x1, y0), (x1, y1), (x0, y1)):
            angles.append(_direction(c, p))
        for p in _circle_box_line_points(c, R, box):
            angles.append(_direction(c, p))
        # grade towards nearby box lines: the clipped ray length p / cos varies
        # by at most a factor 2 per panel
        dists = [abs(v - c[0]) for v in (x0, x1)] + [abs(v - c[1]) for v in (y0, y1)]
        p_min = min((d for d in dists if d > 1e-15), default=R)
        L = 0.5 * R
        while L > p_min and L > 1e-12 * R:
            angles += [_direction(c, p) for p in _circle_box_line_points(c, L, box)]
            L *= 0.5
    for q, R2 in circles:
        d = math.hypot(q[0] - c[0], q[1] - c[1])
        tq = _direction(c, q)
        if tq is not None:
            angles += [tq, tq + np.pi]
            if d >= R2 * (1 - 1e-12):
                beta = math.asin(min(1.0, R2 / d))
                angles += [tq - beta, tq + beta]
        for p in _circle_circle_points(c, R, q, R2):
            angles.append(_direction(c, p))
        if box is not None:
            for p in _circle_box_line_points(q, R2, box):
                angles.append(_direction(c, p))
    for q in kink_points:
        tq = _direction(c, q)
        if tq is not None:
            angles += [tq, tq + np.pi]

    edges = _angular_panels(angles)
    theta, wtheta = _smooth_map(gauss_rule(n_theta), edges[:-1], edges[1:])
    ox, oy = np.cos(theta), np.sin(theta)
    cx = np.full_like(theta, c[0])
    cy = np.full_like(theta, c[1])

    lo = np.zeros_like(theta)
    hi = np.full_like(theta, float(R))
    if box is not None:
        blo, bhi = _ray_box(cx, cy, ox, oy, box)
        lo, hi = np.maximum(lo, blo), np.minimum(hi, bhi)
    if clip_disc is not None:
        t1, t2 = _ray_circle(cx, cy, ox, oy, clip_disc[0], clip_disc[1])
        miss = np.isnan(t1)
        lo = np.where(miss, 0.0, np.maximum(lo, t1))
        hi = np.where(miss, 0.0, np.minimum(hi, t2))
    hi = np.maximum(hi, lo)

    breaks = [lo, hi]
    for q, R2 in circles:
        t1, t2 = _ray_circle(cx, cy, ox, oy, q, R2)
        breaks += [np.nan_to_num(t1, nan=0.0), np.nan_to_num(t2, nan=0.0)]
    for q in kink_points:
        breaks.append(-((c[0] - q[0]) * ox + (c[1] - q[1]) * oy))
    bk = np.stack(breaks, axis=1)
    bk = np.clip(bk, lo[:, None], hi[:, None])
    bk.sort(axis=1)

    rule = gauss_rule(n_rho)
    rho, wrho = rule.on(bk[:, :-1], bk[:, 1:])  # (ntheta, npieces, n_rho)
    px = c[0] + rho * ox[:, None, None]
    py = c[1] + rho * oy[:, None, None]
    vals = np.asarray(func(np.stack([px, py], axis=-1)), dtype=float)
    inner = np.sum(vals * rho * wrho, axis=(1, 2))
    return float(np.dot(inner, wtheta))


def disc_box_overlap_area(center, R: float, box) -> float:
    """Exact area of ``B(center, R) ∩ box``.

    Inclusion-exclusion over the four lower-left quadrants
    ``{x <= a, y <= b}``, each of whose intersection with the disc has a
    closed form.
    """
    cx, cy = float(center[0]), float(center[1])
    x0, y0, x1, y1 = box
    F = lambda a, b: _disc_quadrant_area(a - cx, b - cy, R)
    area = F(x1, y1) - F(x0, y1) - F(x1, y0) + F(x0, y0)
    return max(area, 0.0)


def _disc_quadrant_area(a: float, b: float, R: float) -> float:
    """Area of ``{|z| < R, z_x <= a, z_y <= b}``."""
    if a <= -R or b <= -R:
        return 0.0
    a = min(a, R)

    def S(x, h=None):  # antiderivative of sqrt(R^2 - x^2); h is that root if known
        x = min(max(x, -R), R)
        if h is None:
            h = math.sqrt(max((R - x) * (R + x), 0.0))
        return 0.5 * (x * h + R * R * math.atan2(x, h))

    if b >= R:
        return 2.0 * (S(a) - S(-R))
    # the column height is 2 s(x) where s(x) <= |b|, else b + s(x) (b > 0) or 0 (b < 0)
    e = math.sqrt((R - b) * (R + b))
    hb = abs(b)
    Sa = S(a)
    if b >= 0.0:
        total = 2.0 * ((Sa if a < -e else S(-e, hb)) - S(-R))
        if a > -e:
            hi, Shi = (a, Sa) if a < e else (e, S(e, hb))
            total += b * (hi + e) + Shi - S(-e, hb)
        if a > e:
            total += 2.0 * (Sa - S(e, hb))
        return total
    if a <= -e:
        return 0.0
    hi, Shi = (a, Sa) if a < e else (e, S(e, hb))
    return b * (hi + e) + Shi - S(-e, hb)


# ---------------------------------------------------------------------------
# Weakly singular inner integral
# ---------------------------------------------------------------------------
def inner_singular(x, g, disc_center, R: float, n_rho: int = 16, n_theta: int = 24):
    """Return ``int_{B(disc_center, R)} g(y) / |x - y| dy``.

    Polar coordinates about ``x`` cancel the kernel, so only ``g`` is sampled,
    never at ``y = x``. ``g`` maps points ``(..., 2)`` to ``(...)`` or
    ``(..., k)``; the result has the trailing shape of ``g``.

    Inside the disc, the angle is split at the directions along and across
    ``x - disc_center``. Outside (or on) the circle only the visible window is
    used, with ``sin(alpha) = (R / D) sin(psi)`` so that the chord half-length
    is ``R cos(psi)``. Each ray is split geometrically around its closest
    approach to the disc centre, where ``g`` (a kernel gradient) may kink.
    """
    x = np.asarray(x, dtype=float)
    q = np.asarray(disc_center, dtype=float)
    rel = x - q
    D = float(math.hypot(rel[0], rel[1]))
    th_rule = gauss_rule(n_theta)

    if D < R * (1.0 - 1e-14):
        base = math.atan2(rel[1], rel[0]) if D > 0.0 else 0.0
        edges = base + np.array([0.0, 0.5, 1.0, 1.5, 2.0]) * np.pi
        alpha, w_theta = _smooth_map(th_rule, edges[:-1], edges[1:])
        b = D * np.cos(alpha - base)  # (x - q) . omega
        rmin = np.zeros_like(alpha)
        rmax = -b + np.sqrt(b * b + R * R - D * D)
        closest = -b
        gap = D * np.abs(np.sin(alpha - base))
    else:
        base = math.atan2(-rel[1], -rel[0])  # direction from x towards the centre
        psi, wpsi = _smooth_map(th_rule, np.array([-0.5 * np.pi, 0.0]), np.array([0.0, 0.5 * np.pi]))
        ratio = R / D
        s = ratio * np.sin(psi)
        cos_a = np.sqrt(1.0 - s * s)
        w_theta = wpsi * ratio * np.cos(psi) / cos_a
        half = R * np.cos(psi)
        closest = D * cos_a
        rmin = np.maximum(closest - half, 0.0)
        rmax = closest + half
        gap = D * np.abs(s)
        alpha = base + np.arcsin(s)

    bk = _graded_breaks(rmin, rmax, closest, gap, R)
    rho, wrho = gauss_rule(n_rho).on(bk[:, :-1], bk[:, 1:])
    ox, oy = np.cos(alpha), np.sin(alpha)
    py = np.stack([x[0] + rho * ox[:, None, None], x[1] + rho * oy[:, None, None]], axis=-1)
    vals = np.asarray(g(py), dtype=float)
    if vals.ndim == wrho.ndim:
        radial = np.sum(vals * wrho, axis=(1, 2))
        return float(np.dot(radial, w_theta))
    radial = np.einsum("tpk...,tpk->t...", vals, wrho)
    return np.tensordot(w_theta, radial, axes=(0, 0))


_GRADING = 6.0


def _graded_breaks(lo, hi, closest, gap, R):
    """Radial breakpoints refined geometrically about ``closest`` on each ray.

    Sub-interval lengths grow like the distance to the nearest point of the
    ray to the kink, ``sqrt(gap^2 + (rho - closest)^2)``.
    """
    gap = np.maximum(gap, 1e-300)
    levels = int(np.clip(np.ceil(np.log(2.0 * R / np.min(gap)) / np.log(_GRADING)), 0, 14))
    offs = gap[:, None] * _GRADING ** np.arange(levels)[None, :]
    cols = [lo[:, None], hi[:, None], closest[:, None], closest[:, None] + offs, closest[:, None] - offs]
    bk = np.concatenate(cols, axis=1)
    bk = np.clip(bk, lo[:, None], hi[:, None])
    bk.sort(axis=1)
    return bk


# ---------------------------------------------------------------------------
# Radial profile of the inner potential of grad(Phi)
# ---------------------------------------------------------------------------
_INSIDE_BREAKS = np.array(
    [0.0, 1e-4, 1e-3, 1e-2, 0.05, 0.15, 0.3, 0.5, 0.7, 0.85, 0.95, 0.99, 0.999, 0.9999, 1.0]
)
_OUTSIDE_BREAKS = np.array([0.0, 0.25, 0.5, 0.75, 0.9, 0.97, 0.99, 0.999, 0.9999, 1.0])


class _PiecewiseCheb:
    def __init__(self, breaks, coeffs):
        self.breaks = np.asarray(breaks, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=float)

    @classmethod
    def fit(cls, f, breaks, degree):
        k = np.arange(degree + 1)
        s = np.cos(np.pi * (k + 0.5) / (degree + 1))
        coeffs = []
        for a, b in zip(breaks[:-1], breaks[1:]):
            t = 0.5 * (a + b) + 0.5 * (b - a) * s
            coeffs.append(C.chebfit(s, np.array([f(ti) for ti in t]), degree))
        return cls(breaks, coeffs)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, len(self.coeffs) - 1)
        a, b = self.breaks[idx], self.breaks[idx + 1]
        s = (2.0 * t - a - b) / (b - a)
        cf = self.coeffs[idx]
        # Clenshaw, vectorised over points
        b1 = np.zeros_like(s)
        b2 = np.zeros_like(s)
        for j in range(cf.shape[-1] - 1, 0, -1):
            b1, b2 = cf[..., j] + 2.0 * s * b1 - b2, b1
        return cf[..., 0] + s * b1 - b2


class InnerPotential:
    """Profile ``v`` with ``int_{B(0,1)} grad Phi(y) / |z - y| dy = v(|z|) z/|z|``.

    Tabulated by piecewise Chebyshev interpolation: on ``t in [0, 1]``
    directly, and for ``t > 1`` in ``u = 1/t`` applied to ``t^2 v(t)``, which
    stays bounded as ``t -> infinity``. Every sample is one call of
    :func:`inner_singular`.
    """

    def __init__(self, kernel: WendlandKernel, n_rho: int = 16, n_theta: int = 24, degree: int = 24):
        self.kernel = kernel
        self.orders = (n_rho, n_theta, degree)

        def g(y):
            d = np.hypot(y[..., 0], y[..., 1])
            return profile_deriv(kernel, d) * unit_vectors(y[..., 0], y[..., 1], d)[0]

        def sample(t):
            return inner_singular((t, 0.0), g, (0.0, 0.0), 1.0, n_rho, n_theta)

        self._inside = _PiecewiseCheb.fit(sample, _INSIDE_BREAKS, degree)
        self._outside = _PiecewiseCheb.fit(
            lambda u: sample(1.0 / u) / (u * u) if u > 0 else 0.0, _OUTSIDE_BREAKS, degree
        )

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = t <= 1.0
        u = np.where(inside, 1.0, 1.0 / np.where(inside, 1.0, t))
        return np.where(inside, self._inside(np.minimum(t, 1.0)), self._outside(u) * u * u)


@lru_cache(maxsize=32)
def inner_potential(kernel: WendlandKernel, n_rho: int = 16, n_theta: int = 24, degree: int = 24):
    """Cached :class:`InnerPotential` for a kernel and set of orders."""
    return InnerPotential(kernel, n_rho, n_theta, degree)


def double_layer_energy_pair(rbf_i: ScaledRbf, rbf_j: ScaledRbf, cfg: QuadConfig = QuadConfig()) -> float:
    """Galerkin entry ``<W phi_j, phi_i>`` of two scaled RBFs.

    Evaluated as ``1/(4 pi) int grad phi_i(x) . V_j(x) dx`` over
    ``supp phi_i`` in polar coordinates about its centre, with the inner field
    ``V_j`` taken from the tabulated :class:`InnerPotential` of ``rbf_j``.
    """
    pot = inner_potential(rbf_j.kernel, cfg.inner[0], cfg.inner[1], cfg.profile_degree)
    ci, cj = rbf_i.center, rbf_j.center
    ri, rj = rbf_i.r, rbf_j.r

    def integrand(x):
        gi = scaled_grad(rbf_i, x)
        dx = x[..., 0] - cj[0]
        dy = x[..., 1] - cj[1]
        d = np.hypot(dx, dy)
        ux, uy = unit_vectors(dx, dy, d)
        return pot(d / rj) / (rj * rj) * (gi[..., 0] * ux + gi[..., 1] * uy)

    circles = [(cj, rj)]
    if rbf_j.kernel.m == 0:
        # v(t) is not smooth at t = 0 for the C^0 kernel; grade towards c_j
        circles.append((cj, 0.1 * rj))
    val = polar_integrate(
        integrand, ci, ri, cfg.outer[0], cfg.outer[1],
        kink_circles=circles, kink_points=[cj],
    )
    return val / (4.0 * np.pi)


def double_layer_energy_pair_direct(rbf_i: ScaledRbf, rbf_j: ScaledRbf, cfg: QuadConfig = QuadConfig()) -> float:
    """Same entry by literal nesting: :func:`inner_singular` at every outer point.

    Slow; used to cross-check the tabulated path.
    """
    ci, cj = rbf_i.center, rbf_j.center

    def gj(y):
        return scaled_grad(rbf_j, y)

    def integrand(x):
        shape = x.shape[:-1]
        flat = x.reshape(-1, 2)
        gi = scaled_grad(rbf_i, flat)
        out = np.empty(flat.shape[0])
        for k, (p, gp) in enumerate(zip(flat, gi)):
            if gp[0] == 0.0 and gp[1] == 0.0:
                out[k] = 0.0
                continue
            vec = inner_singular(p, gj, cj, rbf_j.r, cfg.inner[0], cfg.inner[1])
            out[k] = gp @ vec
        return out.reshape(shape)

    val = polar_integrate(
        integrand, ci, rbf_i.r, cfg.outer[0], cfg.outer[1],
        kink_circles=[(cj, rbf_j.r)], kink_points=[cj],
    )
    return val / (4.0 * np.pi)
