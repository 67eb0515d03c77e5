"""Command-line harness: ``verify``, ``solve``, ``converge`` and ``interp-study``.

Every field of :class:`RunConfig` can be set from a JSON file (``--config``)
and overridden by a flag of the same dotted name, e.g. ``--coupling.c_r 0.5``.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import fields
from pathlib import Path

from .analysis import expected_rate
from .config import Coupling, InterpStudy, RunConfig
from .geometry import AssumptionViolation
from .quadrature import QuadConfig
from .solver import RankDeficient
from .study import check_level, converge, interp_study, run_level

CSV_COLUMNS = ("level", "n", "N", "M", "h", "r", "k", "energy", "rel_error", "stab_term", "eoc", "flags")
INTERP_COLUMNS = ("n", "h", "N", "r", "l2_error", "ratio")

logger = logging.getLogger("rbfscreen")


def _dotted_fields(cls, prefix=""):
    nested = {"coupling": Coupling, "quad": QuadConfig, "interp": InterpStudy}
    for f in fields(cls):
        name = prefix + f.name
        sub = nested.get(f.name) if not prefix else None
        if sub is not None:
            yield from _dotted_fields(sub, name + ".")
        else:
            yield name


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbfscreen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("verify", "check assumptions (A1)-(A4) on every level"),
        ("solve", "assemble and solve one level, print a JSON summary"),
        ("converge", "convergence study: CSV table and log-log SVG"),
        ("interp-study", "interpolation error study at fixed r"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="JSON run configuration")
        p.add_argument("--m", type=int, choices=(0, 1, 2))
        p.add_argument("--levels", type=lambda s: [int(v) for v in s.split(",") if v])
        p.add_argument("--out", type=str)
        p.add_argument("--quad-scale", dest="quad_scale", type=float)
        p.add_argument("-v", "--verbose", action="store_true")
        for dotted in _dotted_fields(RunConfig):
            if dotted in {"m", "levels", "out", "quad_scale"}:
                continue
            p.add_argument(f"--{dotted}", dest=f"set:{dotted}", type=_parse_value, metavar="VALUE")
        if name == "solve":
            p.add_argument("--level", type=int, help="n_per_side (default: first configured level)")
        if name == "converge":
            p.add_argument("--no-stab", action="store_true", help="skip the strip H1 seminorm")
    return parser


def load_config(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    overrides = {}
    for key in ("m", "levels", "out", "quad_scale"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    for key, val in vars(args).items():
        if key.startswith("set:") and val is not None:
            overrides[key[4:]] = val
    return cfg.with_overrides(overrides) if overrides else cfg


def cmd_verify(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    ok = True
    for n in cfg.levels:
        chk = check_level(cfg, n)
        status = "PASS" if chk.passed else "FAIL"
        ok &= chk.passed
        extra = " (k clamped to k0)" if chk.k_clamped else ""
        print(f"n={n:4d} r={chk.r:.5f} k={chk.k:.5f}{extra} overlap={chk.min_overlap:.4f} {status}", file=out)
        for msg in chk.failures:
            print(f"    {msg}", file=out)
    print("all levels satisfy (A1)-(A4)" if ok else "assumption check failed", file=out)
    return 0 if ok else 1


def cmd_solve(cfg: RunConfig, n: int, out_dir: Path, out=None) -> int:
    out = out or sys.stdout
    try:
        run = run_level(cfg, n)
    except (AssumptionViolation, RankDeficient, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=out)
        return 2
    summary = run.summary()
    summary["m"] = cfg.m
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = out_dir / f"solve_m{cfg.m}_n{n}"
    stem.with_suffix(".json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    stem.with_suffix(".timings.json").write_text(json.dumps(run.timings, indent=2, sort_keys=True) + "\n")
    print(json.dumps({**summary, "timings": run.timings}, indent=2, sort_keys=True), file=out)
    return 0


def _fmt(v):
    if isinstance(v, (bool, int, str)):
        return str(v)
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def write_csv(path: Path, rows, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c, "")) for c in columns])


def read_csv(path: Path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def plot_convergence(csv_path: Path, svg_path: Path, rate) -> None:
    """Log-log plot of ``rel_error`` and ``stab_term`` against ``h``, read back from the CSV."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_csv(csv_path)
    h = [float(r["h"]) for r in rows]
    err = [abs(float(r["rel_error"])) for r in rows]
    stab = [float(r["stab_term"]) for r in rows]
    # 1 pt per user unit: an 800 x 600 canvas
    fig, ax = plt.subplots(figsize=(800 / 72, 600 / 72), dpi=72)
    if any(math.isfinite(e) and e > 0 for e in err):
        ax.loglog(h, err, "o-", label="error")
    if any(math.isfinite(s) and s > 0 for s in stab):
        ax.loglog(h, stab, "s--", label="stab term")
    finite = [(hh, e) for hh, e in zip(h, err) if math.isfinite(e) and e > 0]
    anchor_h, anchor_e = finite[-1] if finite else (h[-1], 1.0)
    ref = [anchor_e * (hh / anchor_h) ** float(rate) for hh in h]
    ax.loglog(h, ref, "k:", label=f"expected (slope {rate})")
    ax.set_xlabel("h")
    ax.set_ylabel("relative error")
    ax.invert_xaxis()
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    matplotlib.rcParams["svg.hashsalt"] = "rbfscreen"
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    text = Path(svg_path).read_text()
    text = text.replace('width="800pt" height="600pt"', 'width="800" height="600"', 1)
    Path(svg_path).write_text(text)


def cmd_converge(cfg: RunConfig, out_dir: Path, with_stab: bool = True, out=None) -> int:
    out = out or sys.stdout
    try:
        records, fit, timings = converge(cfg, with_stab=with_stab)
    except (AssumptionViolation, RankDeficient) as exc:
        print(f"level failed: {exc}", file=out)
        return 2
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = out_dir / f"converge_m{cfg.m}"
    csv_path = stem.with_suffix(".csv")
    write_csv(csv_path, [r.as_row() for r in records], CSV_COLUMNS)
    rate = expected_rate(cfg.tau)
    plot_convergence(csv_path, stem.with_suffix(".svg"), rate)
    fit_info = None if fit is None else {
        "limit": fit.limit, "coeff": fit.coeff, "beta": fit.beta, "identifiable": fit.identifiable,
        "levels": min(cfg.fit_levels, len(records)),
    }
    (out_dir / f"converge_m{cfg.m}.fit.json").write_text(
        json.dumps({"fit": fit_info, "expected_rate": str(rate), "h1_strip": [r.h1_strip for r in records]},
                   indent=2, sort_keys=True) + "\n"
    )
    (out_dir / f"converge_m{cfg.m}.timings.json").write_text(json.dumps(timings, indent=2) + "\n")
    (out_dir / f"converge_m{cfg.m}.config.json").write_text(cfg.to_json() + "\n")
    for r in records:
        print(f"n={r.n:3d} N={r.N:5d} energy={r.energy:.8f} rel_error={r.rel_error:.4f} "
              f"stab={r.stab_term:.4f} eoc={r.eoc:.3f} {r.flags}", file=out)
    print(f"wrote {csv_path}", file=out)
    return 0


def cmd_interp_study(cfg: RunConfig, out_dir: Path, out=None) -> int:
    out = out or sys.stdout
    rows = interp_study(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"interp_m{cfg.interp.m}.csv"
    write_csv(path, rows, INTERP_COLUMNS)
    for r in rows:
        print(f"n={r['n']:3d} N={r['N']:5d} l2_error={r['l2_error']:.4e} ratio={r['ratio']:.3f}", file=out)
    print(f"wrote {path}", file=out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args)
    except (KeyError, ValueError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(cfg.out)
    if args.command == "verify":
        return cmd_verify(cfg)
    if args.command == "solve":
        return cmd_solve(cfg, args.level if args.level is not None else cfg.levels[0], out_dir)
    if args.command == "converge":
        return cmd_converge(cfg, out_dir, with_stab=not args.no_stab)
    return cmd_interp_study(cfg, out_dir)


if __name__ == "__main__":
    sys.exit(main())
