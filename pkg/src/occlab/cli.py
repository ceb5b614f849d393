"""Command-line front end: one subcommand per experiment kind.

Every subcommand builds an ExperimentConfig and hands it to
run_experiment, so `occlab sweep ...` and `occlab run --config file`
produce identical output for equivalent settings.
"""

import argparse
import sys

from .config import DESIGNS, POLICIES, default_config
from .experiments import ExperimentConfig, load_config, run_experiment

_SIZE_SUFFIXES = {"k": 1 << 10, "m": 1 << 20, "g": 1 << 30}


def parse_size(text: str) -> int:
    """Byte count, optionally suffixed: 1048576, 1M, 16m, 64K."""
    raw = text.strip().lower().rstrip("b")
    if raw and raw[-1] in _SIZE_SUFFIXES:
        return int(raw[:-1]) * _SIZE_SUFFIXES[raw[-1]]
    return int(raw)


def _add_common(sub: argparse.ArgumentParser, default_design="mirage"):
    sub.add_argument("--design", default=default_design, choices=DESIGNS)
    sub.add_argument("--policy", default="random", choices=POLICIES)
    sub.add_argument("--llc-size", default="16M", type=parse_size,
                     help="LLC size in bytes (suffixes K/M/G)")
    sub.add_argument("--seed", default=0, type=int)
    sub.add_argument("--out", default="", help="write results to this path")
    sub.add_argument("--format", default="csv", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="occlab",
        description="occupancy-attack experiments on randomized LLC designs")
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="run an experiment from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default="")

    covert = subs.add_parser("covert", help="single-occupancy covert channel")
    _add_common(covert)
    covert.add_argument("--l", dest="occupancy", default=10_000, type=int,
                        help="receiver occupancy in lines")
    covert.add_argument("--x", default=1_000, type=int)
    covert.add_argument("--y", default=2_000, type=int)
    covert.add_argument("--stride", default=64_000, type=int)
    covert.add_argument("--trials", default=100, type=int)

    sweep = subs.add_parser("sweep", help="occupancy detection sweep")
    _add_common(sweep)
    sweep.add_argument("--designs",
                       default="baseline,ceaser,ceaser_s,scatter,mirage")
    sweep.add_argument("--occupancies",
                       default=("2500,5000,10000,15000,20000,25000,"
                                "30000,35000,40000,45000"))
    sweep.add_argument("--trials", default=25, type=int)

    fp = subs.add_parser("fingerprint", help="workload classification")
    _add_common(fp)
    fp.add_argument("--workloads", default="default",
                    help="workload spec file, or 'default'")
    fp.add_argument("--reps", default=3, type=int)
    fp.add_argument("--n", default=500, type=int)
    fp.add_argument("--occupancy-pct", default=15, type=int)

    aes = subs.add_parser("aes", help="AES last-round key ranking")
    _add_common(aes)
    aes.set_defaults(format="json", llc_size="1M")
    aes.add_argument("--occupancy", default=50, type=int)
    aes.add_argument("--observations", default=20_000, type=int)

    bench_p = subs.add_parser("bench", help="trace replay miss profile")
    _add_common(bench_p, default_design="baseline")
    bench_p.add_argument("--trace", required=True)
    bench_p.add_argument("--warmup", action="store_true", default=True)
    bench_p.add_argument("--no-warmup", dest="warmup", action="store_false")
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    kind = args.command
    cache = default_config(args.design, llc_bytes=args.llc_size,
                           policy=args.policy, seed=args.seed)
    if kind == "covert":
        params = {"occupancy_lines": args.occupancy, "x": args.x,
                  "y": args.y, "stride_bytes": args.stride,
                  "trials": args.trials}
    elif kind == "sweep":
        params = {"designs": args.designs,
                  "occupancies": args.occupancies, "trials": args.trials}
    elif kind == "fingerprint":
        params = {"workloads": args.workloads, "n": args.n,
                  "reps": args.reps, "occupancy_pct": args.occupancy_pct}
    elif kind == "aes":
        params = {"occupancy_pct": args.occupancy,
                  "observations": args.observations}
    else:
        params = {"trace": args.trace, "warmup": args.warmup}
    fmt = "json" if kind in ("aes", "bench") else args.format
    return ExperimentConfig(kind=kind, cache=cache, master_seed=args.seed,
                            out=args.out, format=fmt, params=params)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            text = run_experiment(cfg, out=args.out or None)
        else:
            cfg = _config_from_args(args)
            text = run_experiment(cfg)
    except (ValueError, OSError) as exc:
        print("occlab: %s" % (exc,), file=sys.stderr)
        return 2
    if not (cfg.out or (args.command == "run" and args.out)):
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
