"""Galerkin matrix, coupling matrix and load vector of the mixed RBF scheme."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import SCREEN_BOX, ExtensionMesh, NodeSet
from .kernels import ScaledRbf, WendlandKernel, scaled_eval
from .quadrature import QuadConfig, double_layer_energy_pair, polar_integrate

DUMP_FORMAT = "rbfscreen-saddle"
DUMP_VERSION = 1


@dataclass(frozen=True)
class RbfSpace:
    kernel: WendlandKernel
    nodes: NodeSet
    r: float

    @property
    def N(self) -> int:
        return len(self.nodes)

    @property
    def centers(self) -> np.ndarray:
        return np.asarray(self.nodes.points, dtype=float)

    def rbf(self, i: int) -> ScaledRbf:
        return ScaledRbf(self.kernel, self.centers[i], self.r)


@dataclass
class SaddleSystem:
    """Blocks of ``[[W, -B^T], [B, 0]] [c; lam] = [f; 0]``."""

    W: np.ndarray
    B: np.ndarray
    f: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.W.shape[0]

    @property
    def M(self) -> int:
        return self.B.shape[0]

    def save(self, path) -> None:
        """Write an ``.npz`` snapshot with a versioned header."""
        np.savez(
            path, format=np.array(DUMP_FORMAT), version=np.array(DUMP_VERSION),
            W=self.W, B=self.B, f=self.f,
            meta_keys=np.array(list(self.meta.keys()), dtype=str),
            meta_vals=np.array([float(v) for v in self.meta.values()]),
        )

    @classmethod
    def load(cls, path) -> "SaddleSystem":
        with np.load(path, allow_pickle=False) as z:
            if str(z["format"]) != DUMP_FORMAT or int(z["version"]) != DUMP_VERSION:
                raise ValueError(f"unsupported snapshot {str(z['format'])} v{int(z['version'])}")
            meta = dict(zip(z["meta_keys"].tolist(), z["meta_vals"].tolist()))
            return cls(z["W"], z["B"], z["f"], meta)


def pair_profile(kernel: WendlandKernel, distances, cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    """Unit-scale entries ``<W Phi(. - s e1), Phi>`` for each centre distance ``s``."""
    unit = ScaledRbf(kernel, (0.0, 0.0), 1.0)
    return np.array([
        double_layer_energy_pair(unit, ScaledRbf(kernel, (float(s), 0.0), 1.0), cfg)
        for s in np.asarray(distances, dtype=float)
    ])


def assemble_galerkin(space: RbfSpace, cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    """Dense Galerkin matrix ``W_ij = <W phi_j, phi_i>``.

    Entries depend only on the centre distance, ``W_ij = r^-3 G(|x_i - x_j| / r)``,
    so ``G`` is evaluated once per distinct distance.
    """
    X = space.centers
    d = np.hypot(X[:, None, 0] - X[None, :, 0], X[:, None, 1] - X[None, :, 1]) / space.r
    key = np.round(d, 11)
    uniq, inverse = np.unique(key, return_inverse=True)
    G = pair_profile(space.kernel, uniq, cfg)
    W = G[inverse].reshape(d.shape) / space.r**3
    return 0.5 * (W + W.T)


def assemble_coupling(space: RbfSpace, mesh: ExtensionMesh, cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    """Coupling matrix ``B[T, i] = int_T phi_i`` over the strip cells."""
    X = space.centers
    r = space.r
    B = np.zeros((mesh.M, space.N))
    for t, cell in enumerate(mesh.cells):
        x0, y0, x1, y1 = cell.box
        dx = np.maximum(np.maximum(x0 - X[:, 0], X[:, 0] - x1), 0.0)
        dy = np.maximum(np.maximum(y0 - X[:, 1], X[:, 1] - y1), 0.0)
        for i in np.flatnonzero(np.hypot(dx, dy) < r):
            rbf = space.rbf(i)
            B[t, i] = polar_integrate(
                lambda y, rbf=rbf: scaled_eval(rbf, y), rbf.center, r,
                cfg.outer[0], cfg.outer[1], box=cell.box,
            )
    return B


def assemble_load(space: RbfSpace, f=None, cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    """Load vector ``f_i = int_Gamma f phi_i``; ``f=None`` means ``f = 1``.

    ``f`` may also be a constant or a callable on points of shape ``(..., 2)``.
    """
    if f is None:
        f = 1.0
    if np.isscalar(f):
        const = float(f)
        if const == 0.0:
            return np.zeros(space.N)

        def fun(y):
            return np.full(y.shape[:-1], const)
    else:
        fun = f
    out = np.empty(space.N)
    for i in range(space.N):
        rbf = space.rbf(i)
        out[i] = polar_integrate(
            lambda y, rbf=rbf: fun(y) * scaled_eval(rbf, y), rbf.center, space.r,
            cfg.outer[0], cfg.outer[1], box=SCREEN_BOX,
        )
    return out


def assemble_system(space: RbfSpace, mesh: ExtensionMesh, f=None, cfg: QuadConfig = QuadConfig(), h=math.nan) -> SaddleSystem:
    meta = {"h": float(h), "r": space.r, "k": mesh.k, "m": space.kernel.m}
    return SaddleSystem(
        assemble_galerkin(space, cfg),
        assemble_coupling(space, mesh, cfg),
        assemble_load(space, f, cfg),
        meta,
    )
