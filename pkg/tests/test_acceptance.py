"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from rbfscreen.analysis import expected_rate, fitted_rate
from rbfscreen.assembly import RbfSpace, assemble_galerkin, pair_profile
from rbfscreen.config import InterpStudy, RunConfig
from rbfscreen.geometry import NodeSet, build_extension, mesh_norm, uniform_nodes
from rbfscreen.kernels import profile_unit_integral, wendland
from rbfscreen.quadrature import QuadConfig, disc_box_overlap_area
from rbfscreen.study import converge, interp_study

pytestmark = pytest.mark.acceptance


def test_criterion_1_kernel_table(acceptance):
    t0 = time.perf_counter()
    expected = {
        0: ("C^0", 2, Fraction(3, 2), Fraction(1, 6)),
        1: ("C^2", 5, Fraction(5, 2), Fraction(3, 10)),
        2: ("C^4", 8, Fraction(7, 2), Fraction(5, 14)),
    }
    got = {m: (wendland(m).regularity, wendland(m).degree, wendland(m).tau, expected_rate(wendland(m).tau))
           for m in expected}
    elapsed = time.perf_counter() - t0
    ok = got == expected and elapsed < 1.0
    table = "; ".join(f"m={m}: {g[0]}, deg {g[1]}, tau {g[2]}, rate {g[3]}" for m, g in got.items())
    assert acceptance(1, ok, f"{table} ({elapsed:.3f} s)")


def test_criterion_2_assembly_properties(acceptance):
    t0 = time.perf_counter()
    worst_sym, min_eig = 0.0, math.inf
    for m in (0, 1, 2):
        cfg = RunConfig(m=m)
        for n in (4, 8, 16):
            space = RbfSpace(wendland(m), uniform_nodes(n), cfg.level(n).r)
            W = assemble_galerkin(space)
            worst_sym = max(worst_sym, np.max(np.abs(W - W.T)) / np.max(np.abs(W)))
            np.linalg.cholesky(W)
            min_eig = min(min_eig, np.linalg.eigvalsh(W)[0] * space.r**3)

    # 20-entry probe: centre distances of grid pairs (in units of r) across kernels
    probe = np.linspace(0.0, 2.4, 7)
    self_conv = 0.0
    for m, dists in ((0, probe[:6]), (1, probe), (2, probe)):
        coarse = pair_profile(wendland(m), dists)
        fine = pair_profile(wendland(m), dists, QuadConfig().scaled(2))
        self_conv = max(self_conv, np.max(np.abs(coarse - fine) / np.abs(fine)))

    # scaling law: W(r; x_i, x_j) = r^-3 W(1; x_i / r, x_j / r)
    scale_err = 0.0
    pts = np.array([[0.3, 0.4], [0.33, 0.41], [0.38, 0.45], [0.52, 0.4]])
    for r in (0.2, 0.1):
        Wr = assemble_galerkin(RbfSpace(wendland(1), NodeSet(pts), r))
        W1 = assemble_galerkin(RbfSpace(wendland(1), NodeSet(pts / r), 1.0))
        scale_err = max(scale_err, np.max(np.abs(Wr - W1 / r**3) / np.abs(W1 / r**3)))
    elapsed = time.perf_counter() - t0
    ok = worst_sym <= 1e-8 and min_eig > 0 and self_conv <= 1e-6 and scale_err <= 1e-5 and elapsed <= 300
    assert acceptance(2, ok, f"symmetry {worst_sym:.1e}, SPD (min scaled eig {min_eig:.2e}), "
                             f"self-convergence {self_conv:.1e} on 20 entries, scaling {scale_err:.1e} "
                             f"({elapsed:.0f} s)")


@pytest.fixture(scope="module")
def studies():
    """Default convergence studies for m = 1 (with stab term) and m = 0, plus per-solve checks."""
    out = {}
    for m in (1, 0):
        checks = []

        def on_level(run, checks=checks):
            c = run.solution.c
            fc = float(run.system.f @ c)
            checks.append((run.params.n, run.solution.constraint_norm / max(np.max(np.abs(c)), 1e-300),
                           abs(run.energy - fc) / fc))

        t0 = time.perf_counter()
        records, fit, _ = converge(RunConfig(m=m), with_stab=(m == 1), on_level=on_level)
        out[m] = (records, fit, checks, time.perf_counter() - t0)
    return out


def test_criterion_3_scheme_consistency(acceptance, studies):
    checks = [c for m in studies for c in studies[m][2]]
    worst_b = max(c[1] for c in checks)
    worst_e = max(c[2] for c in checks)
    ok = worst_b <= 1e-10 and worst_e <= 1e-9
    assert acceptance(3, ok, f"{len(checks)} solves: max ||Bc||/||c|| {worst_b:.1e}, "
                             f"max |c'Wc - f'c|/f'c {worst_e:.1e}")


def _rate_summary(records, lo, hi):
    errs = [r.rel_error for r in records]
    hs = [r.h for r in records]
    decreasing = all(b < a for a, b in zip(errs, errs[1:])) and all(e > 0 for e in errs)
    rate = fitted_rate(errs[-4:], hs[-4:]) if all(e > 0 for e in errs[-4:]) else math.nan
    return decreasing, rate, lo <= rate <= hi, errs


def test_criterion_4_convergence_rates(acceptance, studies):
    r1, f1, _, t1 = studies[1]
    r0, f0, _, t0 = studies[0]
    dec1, rate1, in1, e1 = _rate_summary(r1, 0.15, 0.45)
    _, rate0, in0, e0 = _rate_summary(r0, 0.08, 0.25)
    elapsed = t1 + t0
    ok = dec1 and in1 and in0 and elapsed <= 1800
    lim = lambda f: "none" if f is None else f"{f.limit:.5f} (beta {f.beta:.2f})"
    assert acceptance(4, ok, f"m=1 errors {[round(e, 4) for e in e1]} decreasing={dec1}, fitted rate "
                             f"{rate1:.3f} (need [0.15, 0.45]), limit {lim(f1)}; m=0 fitted rate {rate0:.3f} "
                             f"(need [0.08, 0.25]), limit {lim(f0)} ({elapsed:.0f} s)")


def test_criterion_5_stability_term(acceptance, studies):
    stab = [r.stab_term for r in studies[1][0]]
    growth = [b / a for a, b in zip(stab[2:], stab[3:])]
    non_increasing = all(g <= 1.0 for g in growth)
    ok = all(math.isfinite(s) for s in stab) and max(growth) <= 1.5
    assert acceptance(5, ok, f"stab terms {[round(s, 3) for s in stab]}, successive ratios from level 3 "
                             f"{[round(g, 3) for g in growth]} (max allowed 1.5; strictly non-increasing: "
                             f"{non_increasing})")


def test_criterion_6_interpolation_rate(acceptance):
    t0 = time.perf_counter()
    rows = interp_study(RunConfig(interp=InterpStudy(r=0.25, m=1, levels=(16, 32, 64))))
    elapsed = time.perf_counter() - t0
    target = 2 ** 2.5
    ratios = [row["ratio"] for row in rows[1:]]
    errors = ", ".join(f"{row['l2_error']:.3e}" for row in rows)
    ok = all(0.75 * target <= q <= 1.25 * target for q in ratios) and elapsed <= 120
    assert acceptance(6, ok, f"L2 errors [{errors}], ratios "
                             f"{[round(q, 3) for q in ratios]} (need [{0.75 * target:.2f}, "
                             f"{1.25 * target:.2f}]) ({elapsed:.0f} s)")


def test_criterion_7_geometry_values(acceptance):
    hn = mesh_norm(uniform_nodes(4))
    cell = build_extension(0.25).cells[0].box
    side = cell[2] - cell[0]
    r = 0.1
    quarter = disc_box_overlap_area((0, 0), r, (0, 0, side, side)) / (math.pi * r * r)
    half = disc_box_overlap_area((side / 2, 0), r, (0, 0, side, side)) / (math.pi * r * r)
    unit = profile_unit_integral(wendland(1))
    ok = (abs(hn - math.sqrt(2) / 8) <= 1e-12 and abs(quarter - 0.25) <= 1e-12 and abs(half - 0.5) <= 1e-12
          and abs(unit - math.pi / 7) <= 1e-10)
    assert acceptance(7, ok, f"mesh norm {hn:.12f} (sqrt(2)/8 = {math.sqrt(2) / 8:.12f}), overlap "
                             f"{quarter:.12f} / {half:.12f}, unit integral error {abs(unit - math.pi / 7):.1e}")
