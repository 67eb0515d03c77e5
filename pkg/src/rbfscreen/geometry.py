"""Node sets on the unit square screen and the extension strip around it.

The screen is ``Gamma = (0, 1)^2``. The strip of width ``k`` around it is tiled
by ``4/k`` edge cells (one full edge on the screen boundary) and 4 corner
cells (touching the screen only at a vertex).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import Voronoi, cKDTree

from .quadrature import disc_box_overlap_area

SCREEN_BOX = (0.0, 0.0, 1.0, 1.0)
VERTICES = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
DEFAULT_K0 = 0.5
DEFAULT_KAPPA = 0.25
_AREA_TOL = 1e-14


class AssumptionViolation(ValueError):
    """A geometric assumption on (X, r, k) fails; ``failures`` lists why."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


@dataclass(frozen=True)
class NodeSet:
    points: np.ndarray
    n_per_side: int | None = None

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class Cell:
    """Axis-aligned strip cell ``box = (x0, y0, x1, y1)``.

    ``kind`` is ``"edge"`` or ``"corner"``; ``side`` names the screen edge
    (edge cells) or the vertex index 0..3 (corner cells).
    """

    box: tuple
    kind: str
    side: str

    @property
    def area(self) -> float:
        x0, y0, x1, y1 = self.box
        return (x1 - x0) * (y1 - y0)

    def gamma_segment(self):
        """Endpoints of the cell's edge on the screen boundary (edge cells)."""
        x0, y0, x1, y1 = self.box
        if self.side == "bottom":
            return (x0, 0.0), (x1, 0.0)
        if self.side == "top":
            return (x0, 1.0), (x1, 1.0)
        if self.side == "left":
            return (0.0, y0), (0.0, y1)
        if self.side == "right":
            return (1.0, y0), (1.0, y1)
        raise ValueError("corner cells have no edge on the boundary")


@dataclass(frozen=True)
class ExtensionMesh:
    k: float
    cells: tuple
    corner_neighbors: dict
    association: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return len(self.cells)

    def edge_cells(self):
        return [i for i, c in enumerate(self.cells) if c.kind == "edge"]

    def corner_cells(self):
        return [i for i, c in enumerate(self.cells) if c.kind == "corner"]


def uniform_nodes(n_per_side: int) -> NodeSet:
    """Uniform ``(n+1) x (n+1)`` grid on the closed unit square."""
    if int(n_per_side) != n_per_side or n_per_side < 2:
        raise ValueError(f"n_per_side must be an integer >= 2, got {n_per_side!r}")
    n = int(n_per_side)
    t = np.arange(n + 1) / n
    X, Y = np.meshgrid(t, t, indexing="ij")
    return NodeSet(np.column_stack([X.ravel(), Y.ravel()]), n)


def mesh_norm(X: NodeSet, sample_density: int = 200) -> float:
    """Fill distance ``sup_{x in Gamma} dist(x, X)``.

    Exact for uniform grids (half the cell diagonal). Otherwise the maximum
    over a ``sample_density``-squared grid, the square's corners and the
    Voronoi vertices lying in the square.
    """
    pts = np.asarray(X.points, dtype=float)
    if len(pts) == 0:
        raise ValueError("node set is empty")
    if X.n_per_side is not None and len(pts) == (X.n_per_side + 1) ** 2:
        return math.sqrt(2.0) / (2.0 * X.n_per_side)
    t = np.linspace(0.0, 1.0, sample_density)
    G = np.stack(np.meshgrid(t, t), axis=-1).reshape(-1, 2)
    cands = [G, np.array(VERTICES)]
    if len(pts) >= 4:
        try:
            v = Voronoi(pts).vertices
            cands.append(v[np.all((v >= 0.0) & (v <= 1.0), axis=1)])
        except Exception:  # degenerate (collinear) node sets
            pass
    dist, _ = cKDTree(pts).query(np.concatenate(cands))
    return float(dist.max())


def build_extension(k: float, k0: float = DEFAULT_K0) -> ExtensionMesh:
    """Strip of square cells of side ``k`` framing the unit square."""
    if not k > 0:
        raise ValueError("cell side k must be positive")
    K = round(1.0 / k)
    if abs(K * k - 1.0) > 1e-12:
        raise ValueError(f"1/k must be an integer, got k={k!r}")
    if k > k0 + 1e-15:
        raise ValueError(f"cell side k={k} exceeds the bound k0={k0}")
    if K < 2:
        raise ValueError("k=1 gives cells touching two vertices of the screen")
    k = 1.0 / K
    cells = []
    for j in range(K):
        a, b = j * k, (j + 1) * k
        cells.append(Cell((a, -k, b, 0.0), "edge", "bottom"))
    for j in range(K):
        a, b = j * k, (j + 1) * k
        cells.append(Cell((1.0, a, 1.0 + k, b), "edge", "right"))
    for j in range(K):
        a, b = j * k, (j + 1) * k
        cells.append(Cell((a, 1.0, b, 1.0 + k), "edge", "top"))
    for j in range(K):
        a, b = j * k, (j + 1) * k
        cells.append(Cell((-k, a, 0.0, b), "edge", "left"))
    corner_boxes = [(-k, -k, 0.0, 0.0), (1.0, -k, 1.0 + k, 0.0), (1.0, 1.0, 1.0 + k, 1.0 + k), (-k, 1.0, 0.0, 1.0 + k)]
    first = len(cells)
    for v, box in enumerate(corner_boxes):
        cells.append(Cell(box, "corner", str(v)))
    # vertex v: bottom-left, bottom-right, top-right, top-left
    neighbors = {
        first + 0: (0, 3 * K),  # first bottom, first left
        first + 1: (K - 1, K),  # last bottom, first right
        first + 2: (2 * K - 1, 3 * K - 1),  # last right, last top
        first + 3: (2 * K, 4 * K - 1),  # first top, last left
    }
    return ExtensionMesh(k=k, cells=tuple(cells), corner_neighbors=neighbors)


def _cells_met(mesh: ExtensionMesh, center, r: float):
    return [
        t for t, cell in enumerate(mesh.cells)
        if disc_box_overlap_area(center, r, cell.box) > _AREA_TOL * r * r
    ]


def assumption_failures(mesh: ExtensionMesh, X: NodeSet, r: float, k0: float = DEFAULT_K0):
    """Return ``(association, failures)`` for assumptions (A1)-(A3).

    Edge cells take the boundary node nearest their boundary-edge midpoint
    among those whose disc meets the strip inside that cell only; corner
    cells take the screen vertex.
    """
    failures = []
    k = mesh.k
    if not 0 < r < k:
        failures.append(f"A1: need 0 < r < k, got r={r:.6g}, k={k:.6g}")
    if k > k0 + 1e-15:
        failures.append(f"A1: need k <= k0={k0}, got k={k:.6g}")
    pts = np.asarray(X.points, dtype=float)
    on_gamma = (
        np.isclose(pts[:, 0], 0.0) | np.isclose(pts[:, 0], 1.0)
        | np.isclose(pts[:, 1], 0.0) | np.isclose(pts[:, 1], 1.0)
    )
    association = {}
    for t, cell in enumerate(mesh.cells):
        if cell.kind == "edge":
            p0, p1 = cell.gamma_segment()
            mid = (0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1]))
            cand = np.flatnonzero(on_gamma)
            order = cand[np.argsort(np.hypot(pts[cand, 0] - mid[0], pts[cand, 1] - mid[1]), kind="stable")]
            chosen = None
            for i in order:
                met = _cells_met(mesh, pts[i], r)
                if met == [t]:
                    chosen = int(i)
                    break
                if math.hypot(pts[i, 0] - mid[0], pts[i, 1] - mid[1]) > 0.5 * k + r:
                    break
            if chosen is None:
                failures.append(
                    f"A2: edge cell {t} ({cell.side}, box={_fmt_box(cell.box)}) has no node whose "
                    f"support meets the strip only inside it (r={r:.6g})"
                )
            else:
                association[t] = chosen
        else:
            v = VERTICES[int(cell.side)]
            hit = np.flatnonzero(np.hypot(pts[:, 0] - v[0], pts[:, 1] - v[1]) < 1e-12)
            if hit.size == 0:
                failures.append(f"A3: corner cell {t} has no node at vertex {v}")
                continue
            i = int(hit[0])
            allowed = {t, *mesh.corner_neighbors[t]}
            met = set(_cells_met(mesh, pts[i], r))
            if t not in met or not met <= allowed:
                failures.append(
                    f"A3: corner cell {t} (vertex {v}): vertex support meets cells {sorted(met)}, "
                    f"allowed {sorted(allowed)}"
                )
            else:
                association[t] = i
    for t, (a, b) in mesh.corner_neighbors.items():
        if mesh.cells[a].kind != "edge" or mesh.cells[b].kind != "edge":
            failures.append(f"A3: corner cell {t} lacks two edge neighbours")
    return association, failures


def associate_nodes(mesh: ExtensionMesh, X: NodeSet, r: float, k0: float = DEFAULT_K0) -> ExtensionMesh:
    """Attach ``x_{i(T)}`` to every strip cell; raise on (A1)-(A3) failure."""
    association, failures = assumption_failures(mesh, X, r, k0)
    if failures:
        raise AssumptionViolation(failures)
    return replace(mesh, association=association)


@dataclass(frozen=True)
class OverlapReport:
    ratios: dict
    kappa: float

    @property
    def min_ratio(self) -> float:
        return min(self.ratios.values())

    @property
    def passed(self) -> bool:
        return self.min_ratio >= self.kappa - 1e-12


def verify_overlap(mesh: ExtensionMesh, X: NodeSet, r: float, kappa: float = DEFAULT_KAPPA) -> OverlapReport:
    """Overlap ratios ``meas(supp phi_{i(T)} ∩ T) / (pi r^2)`` for (A4)."""
    if not mesh.association:
        raise ValueError("run associate_nodes first")
    pts = np.asarray(X.points, dtype=float)
    ratios = {
        t: disc_box_overlap_area(pts[i], r, mesh.cells[t].box) / (math.pi * r * r)
        for t, i in mesh.association.items()
    }
    return OverlapReport(ratios, kappa)


def _fmt_box(box):
    return "(" + ", ".join(f"{v:.4g}" for v in box) + ")"
