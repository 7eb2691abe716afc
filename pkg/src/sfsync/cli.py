"""Command line entry point.

    sfsync run --config exp.cfg --out results/ [--seed N] [--phases N] [--coupling MODE]
    sfsync analyze --snapshots results/snapshots [--out reports.jsonl]
    sfsync oracle --betweenness graph.edgelist

Exit status is 0 on success, 1 for a bad configuration or bad arguments and
2 when the run itself fails.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from sfsync import __version__
from sfsync.centrality import brute_force_betweenness
from sfsync.dynamics import COUPLING_MODES
from sfsync.errors import ConfigInvalid, SfsyncError
from sfsync.experiment import analyze_snapshots, load_config, run_experiment
from sfsync.graph import read_edgelist

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would exit with status 2, which is reserved for runtime failures
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _u64(text):
    value = int(text)
    if not (0 <= value < 2**64):
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sfsync", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"sfsync {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a multi-phase experiment")
    run.add_argument("--config", required=True, help="flat key = value config file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
    run.add_argument("--phases", type=int, help="number of phases (overrides the config)")
    run.add_argument("--coupling", choices=COUPLING_MODES[1:] + ("diffusive",),
                     help="coupling mode (overrides the config)")
    run.add_argument("--quiet", action="store_true", help="suppress the per-phase summary")

    ana = sub.add_parser("analyze", help="re-analyze stored snapshot edge lists")
    ana.add_argument("--snapshots", required=True, help="directory of phase edge lists")
    ana.add_argument("--out", help="write reports here instead of stdout")
    ana.add_argument("--bootstrap", type=int, default=0, help="bootstrap resamples for CIs")
    ana.add_argument("--seed", type=_u64, default=0, help="bootstrap seed")

    ora = sub.add_parser("oracle", help="brute-force reference values for small graphs")
    ora.add_argument("--betweenness", required=True, metavar="EDGELIST",
                     help="edge list with at most 12 nodes")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    overrides = {k: v for k, v in (("seed", args.seed), ("phases", args.phases),
                                   ("coupling", args.coupling)) if v is not None}
    cfg = dataclasses.replace(cfg, out=args.out, **overrides)
    cfg.validate()
    result = run_experiment(cfg, write=True)
    if not args.quiet:
        for r in result.reports:
            print(f"phase {r.phase:3d}  n={r.n:5d}  m={r.m:6d}  "
                  f"isolated={r.isolated_before_repair:4d}  deg-bet={r.deg_bet:.3f}  {r.verdict}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    snapdir = Path(args.snapshots)
    if not snapdir.is_dir():
        raise ConfigInvalid(f"not a directory: {snapdir}")
    reports = analyze_snapshots(snapdir, bootstrap=args.bootstrap, seed=args.seed)
    text = "".join(json.dumps(r.to_json(), sort_keys=True) + "\n" for r in reports)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    try:
        g = read_edgelist(args.betweenness)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read {args.betweenness}: {exc}") from None
    for node, value in enumerate(brute_force_betweenness(g)):
        print(f"{node} {float(value)!r}")
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "analyze": _cmd_analyze, "oracle": _cmd_oracle}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SfsyncError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
