"""Command line entry point.

Subcommands::

    substruct solve --config sweep.json
    substruct solve --problem elasticity --precond b1 --n 4 --m 8 --jump none --tol 1e-6 --out results.csv
    substruct table13 --problem maxwell --h 8,16
    substruct coarsening --problem elasticity --m 8,16,32 --out ratios.csv
    substruct report --in results.csv --layout paper-style

Exit status is 0 on completion (runs that hit the iteration limit are
recorded, not fatal) and 2 on an invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import sys

from . import __version__, kernels
from .experiments import (PRECONDITIONERS, ConfigError, ExperimentConfig, coarsening_rows,
                          emit_table, read_results_csv, run_experiment,
                          run_table13_experiment)

EXIT_CONFIG = 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="substruct",
                                description="Substructuring preconditioners for PCG.")
    p.add_argument("--version", action="version",
                   version=f"%(prog)s {__version__} (kernels: {kernels.backend})")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run a sweep of PCG solves")
    s.add_argument("--config", help="JSON experiment description")
    s.add_argument("--problem", choices=["elasticity", "maxwell"])
    s.add_argument("--precond", choices=PRECONDITIONERS, default=None)
    s.add_argument("--n", help="subdomains per axis, comma separated")
    s.add_argument("--m", help="fine cells per subdomain per axis, comma separated")
    s.add_argument("--jump", choices=["none", "choice1", "choice2"], default=None)
    s.add_argument("--coeff", help="coefficient values inside the jump region")
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--max-iter", type=int, default=None)
    s.add_argument("--out", help="CSV output path")
    s.add_argument("--quiet", action="store_true")

    t = sub.add_parser("table13", help="interface error of the graded two-cube solve")
    t.add_argument("--problem", choices=["elasticity", "maxwell"], required=True)
    t.add_argument("--h", default="8,16", help="values of 1/h, comma separated")
    t.add_argument("--out", help="CSV output path")

    c = sub.add_parser("coarsening", help="kept/full dof counts of the graded local solvers")
    c.add_argument("--problem", choices=["elasticity", "maxwell"], required=True)
    c.add_argument("--m", default="8,16,32")
    c.add_argument("--out", help="CSV output path")

    r = sub.add_parser("report", help="re-render a results CSV")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--layout", choices=["paper-style", "flat-csv"], default="paper-style")
    r.add_argument("--out")
    return p


def _solve_config(args) -> ExperimentConfig:
    flags = {"problem": args.problem, "preconditioner": args.precond, "n": args.n,
             "m": args.m, "jump": args.jump, "coefficients": args.coeff, "tol": args.tol,
             "max_iter": args.max_iter, "output": args.out}
    given = {k: v for k, v in flags.items() if v is not None}
    if args.config:
        extra = set(given) - {"output"}
        if extra:
            raise ConfigError("--config cannot be combined with "
                              + ", ".join(sorted("--" + k for k in extra)))
        cfg = ExperimentConfig.from_json(args.config)
        if args.out:
            cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "output": args.out})
        return cfg
    if "problem" not in given:
        raise ConfigError("either --config or --problem is required")
    return ExperimentConfig.from_dict(given)


def _write_rows(rows: list[dict], path, stream):
    if not rows:
        return
    fh = open(path, "w", newline="") if path else stream
    try:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
    finally:
        if path:
            fh.close()


def _ints(text: str, name: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--{name} expects comma-separated integers") from None
    if not vals:
        raise ConfigError(f"--{name} is empty")
    return vals


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out = sys.stdout
    try:
        if args.command == "solve":
            cfg = _solve_config(args)
            log = None if args.quiet else (lambda s: print(s, file=sys.stderr))
            rows = run_experiment(cfg, log=log)
            if not cfg.output:
                out.write(emit_table(rows, "flat-csv"))
        elif args.command == "table13":
            cells = _ints(args.h, "h")
            if any(c < 2 or c % 2 for c in cells):
                raise ConfigError("--h values must be even and at least 2")
            res = run_table13_experiment(args.problem, cells)
            _write_rows([dict(problem=r.problem, h=f"1/{r.cells}", error=r.error, kept=r.kept,
                              full=r.full, ratio=r.ratio) for r in res], args.out, out)
        elif args.command == "coarsening":
            ms = _ints(args.m, "m")
            if any(m < 2 or m % 2 for m in ms):
                raise ConfigError("--m values must be even and at least 2")
            _write_rows(coarsening_rows(args.problem, ms), args.out, out)
        elif args.command == "report":
            try:
                rows = read_results_csv(args.inp)
            except (OSError, ValueError, KeyError) as exc:
                raise ConfigError(f"cannot read {args.inp}: {exc}") from None
            try:
                text = emit_table(rows, args.layout, args.out)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            if not args.out:
                out.write(text)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
