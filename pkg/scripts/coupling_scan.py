"""Scan the coupling constants ``(c_r, c_k)`` on the default ladder.

For each admissible pair prints the energies and, for fits over the finest
3, 4 and 6 levels, the extrapolated limit, the fitted exponent and the
least-squares rate of the relative errors over the finest four levels.

    python scripts/coupling_scan.py --m 1 --cr 0.4,0.5,0.6 --ck 1.5,2,3
"""
import argparse
import itertools

import numpy as np

from rbfscreen.analysis import fit_energy_limit, fitted_rate, relative_error
from rbfscreen.config import DEFAULT_LEVELS, Coupling, RunConfig
from rbfscreen.geometry import AssumptionViolation
from rbfscreen.study import check_level, run_level


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--cr", default="0.4,0.5,0.6")
    ap.add_argument("--ck", default="1.5,2,3")
    ap.add_argument("--levels", default=",".join(map(str, DEFAULT_LEVELS)))
    args = ap.parse_args()
    levels = [int(v) for v in args.levels.split(",")]
    for cr, ck in itertools.product(map(float, args.cr.split(",")), map(float, args.ck.split(","))):
        cfg = RunConfig(m=args.m, levels=levels, coupling=Coupling(cr, ck))
        bad = next((n for n in levels if not check_level(cfg, n).passed), None)
        if bad is not None:
            print(f"c_r={cr} c_k={ck}: inadmissible at n={bad}")
            continue
        try:
            E = [run_level(cfg, n).energy for n in levels]
        except AssumptionViolation as exc:
            print(f"c_r={cr} c_k={ck}: {exc}")
            continue
        hs = [cfg.level(n).h for n in levels]
        parts = []
        for nf in sorted({3, 4, len(levels)}):
            try:
                fit = fit_energy_limit(E[-nf:], hs[-nf:])
            except ValueError as exc:
                parts.append(f"fit{nf}: {type(exc).__name__}")
                continue
            errs = np.abs([relative_error(e, fit.limit).value for e in E])
            rate = fitted_rate(errs[-4:], hs[-4:]) if np.all(errs[-4:] > 0) else float("nan")
            parts.append(f"fit{nf}: limit {fit.limit:.4f} beta {fit.beta:.2f} rate {rate:.3f}")
        print(f"c_r={cr} c_k={ck}: E=" + " ".join(f"{e:.4f}" for e in E) + " | " + "; ".join(parts), flush=True)


if __name__ == "__main__":
    main()
