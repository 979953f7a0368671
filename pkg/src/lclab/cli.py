"""Command line front end.

Subcommands::

    lab run <config-file> [--out PATH] [--seed N] [--threads K]
    lab replay <record-file> [--threads K]
    lab export <records> <csv> [--no-figures] [--figdir DIR]
    lab list

Exit codes: 0 success, 1 an asserted inequality failed (or replay
mismatch), 2 configuration or input format error.  ``LAB_THREADS`` sets
the default worker count; results never depend on it.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_config
from .experiments import REGISTRY, replay_records, run_experiment
from .records import RecordFormatError, export_csv, read_records, write_records

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("LAB_THREADS", "1")))
    except ValueError:
        return 1


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _print_summary(records) -> None:
    header = f"{'metric':<34} {'coords':<26} {'estimate':>12} {'ci/stderr':>24} {'pass':>5}"
    print(header)
    print("-" * len(header))
    for rec in records:
        coords = ",".join(f"{k}={_fmt(v)}" for k, v in rec.coords.items())
        if rec.ci_low is not None:
            err = f"[{_fmt(rec.ci_low)}, {_fmt(rec.ci_high)}]"
        elif rec.stderr is not None:
            err = f"+/- {_fmt(rec.stderr)}"
        else:
            err = "-"
        flag = "-" if rec.passed is None else ("ok" if rec.passed else "FAIL")
        print(f"{rec.metric:<34} {coords:<26} {_fmt(rec.estimate):>12} {err:>24} {flag:>5}")


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, root_seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, out_path=args.out)
        records = run_experiment(cfg, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_path = cfg.out_path or f"{cfg.experiment}.jsonl"
    write_records(records, out_path)
    print(f"experiment {cfg.experiment!r} (seed {cfg.root_seed}) -> {out_path}")
    _print_summary(records)
    failed = [r for r in records if r.passed is False]
    if failed:
        print(f"{len(failed)} asserted metric(s) FAILED", file=sys.stderr)
        return EXIT_ASSERTION
    return EXIT_OK


def _cmd_replay(args) -> int:
    try:
        records = read_records(args.records)
        results = replay_records(records, threads=args.threads)
    except (RecordFormatError, ConfigError, OSError) as exc:
        print(f"replay input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    bad = [r for r in results if not r.matches]
    for r in bad:
        print(f"MISMATCH {r.record.experiment}/{r.record.metric} {r.record.coords}", file=sys.stderr)
    print(f"replayed {len(results)} record(s), {len(results) - len(bad)} reproduced")
    return EXIT_OK if not bad else EXIT_ASSERTION


def _cmd_export(args) -> int:
    try:
        records = read_records(args.records)
    except (RecordFormatError, OSError) as exc:
        print(f"export input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    export_csv(records, args.csv)
    print(f"wrote {args.csv} ({len(records)} rows)")
    if not args.no_figures:
        from .plotting import render_figures

        csv_path = Path(args.csv)
        figdir = Path(args.figdir) if args.figdir else csv_path.parent
        for path in render_figures(records, figdir, csv_path.stem):
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_list(_args) -> int:
    width = max(len(name) for name in REGISTRY)
    for name in sorted(REGISTRY):
        print(f"{name:<{width}}  {REGISTRY[name].description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lab", description="log-concave measure laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a configured experiment")
    run.add_argument("config")
    run.add_argument("--out", help="output record file (JSON lines)")
    run.add_argument("--seed", type=int, help="override root_seed")
    run.add_argument("--threads", type=int, default=_default_threads())
    run.set_defaults(fn=_cmd_run)

    rep = sub.add_parser("replay", help="recompute stored records and compare bit-for-bit")
    rep.add_argument("records")
    rep.add_argument("--threads", type=int, default=_default_threads())
    rep.set_defaults(fn=_cmd_replay)

    exp = sub.add_parser("export", help="flatten records to CSV and render figures")
    exp.add_argument("records")
    exp.add_argument("csv")
    exp.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    exp.add_argument("--figdir", help="directory for figures (default: next to the CSV)")
    exp.set_defaults(fn=_cmd_export)

    lst = sub.add_parser("list", help="print the experiment registry")
    lst.set_defaults(fn=_cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
