"""Command-line harness: experiment runs, solver access, calibration.

Subcommands:
  run          seeded Monte-Carlo experiment -> results.csv + summary.csv
  solve-bqp    solve one plain-text instance with the BRB solver or the oracle
  calibrate-ks empirical false-alarm rate of the KS detector under the null
  bench-bqp    per-dimension solver-vs-oracle timing CSV

The environment variable BEAMKM_SEED overrides the config seed for `run`.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import dmo
from .bench import bench_bqp_timing, calibrate_ks, run_experiment
from .config import load_config


def _parse_dims(spec):
    """Dimension list from '2..16' (inclusive range) or '2,4,8'."""
    if ".." in spec:
        lo, _, hi = spec.partition("..")
        dims = list(range(int(lo), int(hi) + 1))
    else:
        dims = [int(x) for x in spec.split(",")]
    if not dims or min(dims) < 1:
        raise ValueError(f"invalid dimension spec {spec!r}")
    return dims


def cmd_run(args):
    cfg = load_config(args.config)
    env_seed = os.environ.get("BEAMKM_SEED")
    if env_seed is not None:
        cfg = replace(cfg, seed=int(env_seed))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = run_experiment(cfg, out_dir=str(out_dir), jobs=args.jobs)
    print(f"wrote {len(records)} records to {out_dir / 'results.csv'}")
    print(f"wrote summary to {out_dir / 'summary.csv'}")
    return 0


def cmd_solve_bqp(args):
    inst = dmo.read_instance(args.instance)
    if args.method == "dmo":
        psi = dmo.solve_bqp(inst, eps_acc=args.eps_acc)
    else:
        psi = dmo.brute_force_bqp(inst)
    print("psi:", " ".join(str(int(x)) for x in psi))
    print("objective:", dmo.bqp_objective(inst, psi))
    return 0


def cmd_calibrate_ks(args):
    report = calibrate_ks(args.alpha, args.l, args.trials, args.seed,
                          out_path=args.out)
    print(f"alpha={report['alpha']} L={report['l_samples']} "
          f"epsilon={report['epsilon']:.6f} "
          f"empirical_fa={report['empirical_fa']:.6f} trials={report['trials']}")
    if args.out:
        print(f"wrote {args.out}")
    return 0


def cmd_bench_bqp(args):
    rows = bench_bqp_timing(_parse_dims(args.dims), args.per_dim, args.seed,
                            out_path=args.out)
    for d, method, mean_ms, median_ms, matches in rows:
        print(f"d={d:2d} {method:5s} mean={mean_ms:10.3f} ms "
              f"median={median_ms:10.3f} ms matches={matches}")
    if args.out:
        print(f"wrote {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="beamkm", description="Kolmogorov-model beam alignment harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a seeded Monte-Carlo experiment")
    p_run.add_argument("--config", required=True, help="key = value config file")
    p_run.add_argument("--out", required=True, help="output directory for CSVs")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    p_run.set_defaults(func=cmd_run)

    p_solve = sub.add_parser("solve-bqp", help="solve one plain-text instance")
    p_solve.add_argument("--instance", required=True)
    p_solve.add_argument("--method", choices=["dmo", "brute"], default="dmo")
    p_solve.add_argument("--eps-acc", type=float, default=dmo.DEFAULT_EPS_ACC)
    p_solve.set_defaults(func=cmd_solve_bqp)

    p_cal = sub.add_parser("calibrate-ks", help="null false-alarm calibration")
    p_cal.add_argument("--alpha", type=float, required=True)
    p_cal.add_argument("--l", type=int, required=True)
    p_cal.add_argument("--trials", type=int, required=True)
    p_cal.add_argument("--seed", type=int, required=True)
    p_cal.add_argument("--out", default=None, help="optional CSV path")
    p_cal.set_defaults(func=cmd_calibrate_ks)

    p_bench = sub.add_parser("bench-bqp", help="solver-vs-oracle timing")
    p_bench.add_argument("--dims", required=True, help="e.g. 2..16 or 2,4,8")
    p_bench.add_argument("--per-dim", type=int, required=True)
    p_bench.add_argument("--seed", type=int, required=True)
    p_bench.add_argument("--out", default=None, help="optional CSV path")
    p_bench.set_defaults(func=cmd_bench_bqp)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, dmo.ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
