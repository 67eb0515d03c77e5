"""Per-level runs and convergence studies driven by a :class:`RunConfig`."""
from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import (
    ConvergenceRecord, FitDiverged, NonMonotone, eoc, fit_energy_limit, h1_seminorm_strip,
    relative_error, stability_term,
)
from .assembly import RbfSpace, SaddleSystem, assemble_coupling, assemble_galerkin, assemble_load
from .config import LevelParams, RunConfig
from .geometry import (
    AssumptionViolation, ExtensionMesh, associate_nodes, assumption_failures, build_extension, uniform_nodes,
    verify_overlap,
)
from .interpolation import InterpolationProblem, gaussian_bump, interpolate, l2_error
from .kernels import wendland
from .solver import DiscreteSolution, solve_saddle

logger = logging.getLogger(__name__)


@dataclass
class LevelCheck:
    n: int
    r: float
    k: float
    k_clamped: bool
    failures: list
    min_overlap: float = math.nan

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass
class LevelRun:
    params: LevelParams
    space: RbfSpace
    mesh: ExtensionMesh
    system: SaddleSystem
    solution: DiscreteSolution
    timings: dict = field(default_factory=dict)

    @property
    def energy(self) -> float:
        return self.solution.energy(self.system.W)

    def summary(self) -> dict:
        c = self.solution.c
        load_work = float(self.system.f @ c)
        return {
            "n": self.params.n, "N": self.space.N, "M": self.mesh.M,
            "h": self.params.h, "r": self.params.r, "k": self.params.k,
            "k_clamped": self.params.k_clamped,
            "energy": self.energy, "load_work": load_work,
            "constraint_norm": self.solution.constraint_norm,
            "coef_norm": float(np.max(np.abs(c), initial=0.0)),
            "residual_w": self.solution.residual_w, "residual_b": self.solution.residual_b,
            "rcond": self.solution.rcond,
        }


def check_level(cfg: RunConfig, n: int) -> LevelCheck:
    """Assumptions (A1)-(A3) and the overlap bound (A4) for one level."""
    try:
        p = cfg.level(n)
    except ValueError as exc:
        return LevelCheck(n, math.nan, math.nan, False, [f"A1: {exc}"])
    X = uniform_nodes(n)
    try:
        mesh = build_extension(p.k, cfg.coupling.k0)
    except ValueError as exc:
        return LevelCheck(n, p.r, p.k, p.k_clamped, [f"A1: {exc}"])
    assoc, failures = assumption_failures(mesh, X, p.r, cfg.coupling.k0)
    out = LevelCheck(n, p.r, p.k, p.k_clamped, failures)
    if not failures:
        report = verify_overlap(replace(mesh, association=assoc), X, p.r, cfg.coupling.kappa)
        out.min_overlap = report.min_ratio
        if not report.passed:
            out.failures.append(f"A4: overlap ratio {report.min_ratio:.4f} < kappa={cfg.coupling.kappa}")
    return out


def run_level(cfg: RunConfig, n: int, load=None) -> LevelRun:
    """Assemble and solve one level; raises ``AssumptionViolation`` if the setup is inadmissible."""
    p = cfg.level(n)
    X = uniform_nodes(n)
    mesh = associate_nodes(build_extension(p.k, cfg.coupling.k0), X, p.r, cfg.coupling.k0)
    report = verify_overlap(mesh, X, p.r, cfg.coupling.kappa)
    if not report.passed:
        raise AssumptionViolation([f"A4: overlap ratio {report.min_ratio:.4f} < kappa={cfg.coupling.kappa}"])
    space = RbfSpace(cfg.kernel, X, p.r)
    q = cfg.quadrature
    timings = {}
    t0 = time.perf_counter()
    W = assemble_galerkin(space, q)
    timings["galerkin"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    B = assemble_coupling(space, mesh, q)
    f = assemble_load(space, cfg.load if load is None else load, q)
    timings["coupling_load"] = time.perf_counter() - t0
    system = SaddleSystem(W, B, f, {"h": p.h, "r": p.r, "k": p.k, "m": cfg.m, "n": n})
    t0 = time.perf_counter()
    sol = solve_saddle(system)
    timings["solve"] = time.perf_counter() - t0
    logger.info("n=%d N=%d M=%d energy=%.10g", n, space.N, mesh.M, sol.energy(W))
    return LevelRun(p, space, mesh, system, sol, timings)


def converge(cfg: RunConfig, with_stab: bool = True, on_level=None):
    """Run every level and fill the convergence records.

    Returns ``(records, fit, timings)``; ``fit`` is ``None`` when extrapolation
    failed, in which case the records carry the reason in ``flags``.
    ``on_level(run)`` is called with each :class:`LevelRun` before it is dropped.
    """
    records, timings = [], []
    for j, n in enumerate(cfg.levels):
        run = run_level(cfg, n)
        if on_level is not None:
            on_level(run)
        t = dict(run.timings)
        flags = ["k_clamped"] if run.params.k_clamped else []
        stab = h1 = math.nan
        if with_stab:
            t0 = time.perf_counter()
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                h1 = h1_seminorm_strip(run.solution, run.space, run.mesh, cfg.quadrature)
            stab = stability_term(h1, run.params.k, run.params.r)
            t["stab"] = time.perf_counter() - t0
        records.append(ConvergenceRecord(
            level=j, n=n, N=run.space.N, M=run.mesh.M, h=run.params.h, r=run.params.r, k=run.params.k,
            energy=run.energy, stab_term=stab, h1_strip=h1, flags=";".join(flags),
        ))
        timings.append({"n": n, **t})
    fit = fill_errors(records, cfg.fit_levels)
    return records, fit, timings


def fill_errors(records, fit_levels: int = 4):
    """Relative errors against the extrapolated energy and successive EOCs, in place."""
    E = [rec.energy for rec in records]
    hs = [rec.h for rec in records]
    nf = min(fit_levels, len(records))
    try:
        fit = fit_energy_limit(E[-nf:], hs[-nf:])
    except (NonMonotone, FitDiverged, ValueError) as exc:
        for rec in records:
            rec.flags = _add_flag(rec.flags, f"extrapolation:{type(exc).__name__}")
        return None
    if not fit.identifiable:
        for rec in records:
            rec.flags = _add_flag(rec.flags, "beta_unidentifiable")
    for rec in records:
        err = relative_error(rec.energy, fit.limit)
        rec.rel_error = err.value
        if err.overshoot:
            rec.flags = _add_flag(rec.flags, "overshoot")
    for a, b in zip(records, records[1:]):
        if a.rel_error != 0 and b.rel_error != 0:
            b.eoc = eoc([abs(a.rel_error), abs(b.rel_error)], [a.h, b.h])[0]
    return fit


def _add_flag(flags: str, flag: str) -> str:
    return flag if not flags else f"{flags};{flag}"


def interp_study(cfg: RunConfig):
    """L2 interpolation errors for a Gaussian bump at fixed ``r`` on refined grids."""
    s = cfg.interp
    target = gaussian_bump(s.center, s.width)
    rows = []
    for n in s.levels:
        space = RbfSpace(wendland(s.m), uniform_nodes(n), s.r)
        a = interpolate(InterpolationProblem.from_function(space, target))
        err = l2_error(space, a, target, n_quad=s.n_quad)
        rows.append({"n": n, "h": math.sqrt(2.0) / (2.0 * n), "N": space.N, "r": s.r, "l2_error": err})
    for a, b in zip(rows, rows[1:]):
        b["ratio"] = a["l2_error"] / b["l2_error"]
    if rows:
        rows[0]["ratio"] = math.nan
    return rows
