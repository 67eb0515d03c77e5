"""Energy at fixed ``(r, k)`` while the grid is refined.

With ``r`` and ``k`` frozen the discrete space saturates; the limit shows the
consistency error of the non-conforming space at that ``r`` and gives an
independent upper estimate of the true energy.

    python scripts/reference_energy.py --m 1 --r 0.1 --K 4 --levels 12,18,24,36
"""
import argparse
import time

from rbfscreen.assembly import RbfSpace, assemble_system
from rbfscreen.geometry import associate_nodes, assumption_failures, build_extension, uniform_nodes
from rbfscreen.kernels import wendland
from rbfscreen.solver import solve_saddle


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--r", type=float, default=0.1)
    ap.add_argument("--K", type=int, default=4, help="strip cells per screen edge (k = 1/K)")
    ap.add_argument("--levels", default="12,18,24,36")
    args = ap.parse_args()
    kernel = wendland(args.m)
    print("n,N,r_over_spacing,energy,seconds")
    for n in (int(v) for v in args.levels.split(",")):
        X = uniform_nodes(n)
        mesh = build_extension(1.0 / args.K)
        _, failures = assumption_failures(mesh, X, args.r)
        if failures:
            print(f"{n},,,inadmissible: {failures[0]}")
            continue
        t0 = time.perf_counter()
        system = assemble_system(RbfSpace(kernel, X, args.r), associate_nodes(mesh, X, args.r))
        energy = solve_saddle(system).energy(system.W)
        print(f"{n},{len(X)},{args.r * n:.3f},{energy:.10f},{time.perf_counter() - t0:.1f}", flush=True)


if __name__ == "__main__":
    main()
