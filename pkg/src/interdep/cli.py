"""Command line entry point: simulate, analyze, report, schema.

`simulate` plays seeded episodes and writes one trace file per seed;
`analyze` replays traces into per-episode reports plus an aggregate
summary; `report` re-aggregates previously written report JSON files;
`schema` dumps the predicate vocabulary and subtask templates.

Every failure path exits 1 with a single `error: ...` line on stderr. Set
INTERDEP_LOG=DEBUG (or INFO) for progress logging. Seed batches run on a
thread pool; all files are written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

from .errors import InterdepError
from .grounding import vocabulary_dump
from .gridworld import EpisodeConfig, load_layout
from .interdependence import analyze_trace, build_interaction_schema
from .metrics import aggregate, build_report
from .policies import parse_policy_spec, run_episode
from .trace_io import (
    read_report,
    read_trace,
    report_to_csv,
    report_to_markdown,
    summary_to_markdown,
    trace_to_text,
)

LOG = logging.getLogger("interdep")

TRACE_SUFFIX = ".trace.jsonl"
REPORT_FORMATS = {"json": ".report.json", "csv": ".report.csv", "markdown": ".report.md"}


def _configure_logging() -> None:
    name = os.environ.get("INTERDEP_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s"
    )


def _parse_seeds(text: str) -> list:
    lo, sep, hi = text.partition("..")
    try:
        if sep:
            seeds = list(range(int(lo), int(hi) + 1))
        else:
            seeds = [int(lo)]
    except ValueError:
        raise ValueError(f"bad seed spec {text!r}: use N or A..B") from None
    if not seeds:
        raise ValueError(f"empty seed range {text!r}")
    return seeds


def _atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _read_layout_file(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InterdepError(f"cannot read layout {path}: {e}") from e
    return load_layout(text)


def _config_from_args(args) -> EpisodeConfig:
    return EpisodeConfig(
        target_soups=args.target_soups,
        horizon=args.horizon,
        cook_time=args.cook_time,
        reward_per_soup=args.reward_per_soup,
    )


def _report_text(obj, fmt: str) -> str:
    from .metrics import TeamReport

    if fmt == "json":
        return json.dumps(obj.to_dict(), sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        return report_to_csv(obj)
    if isinstance(obj, TeamReport):
        return report_to_markdown(obj)
    return summary_to_markdown(obj)


def cmd_simulate(args) -> int:
    layout = _read_layout_file(args.layout)
    spec1 = parse_policy_spec(args.p1)
    spec2 = parse_policy_spec(args.p2)
    config = _config_from_args(args)
    seeds = _parse_seeds(args.seeds)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.layout).name.removesuffix(".layout")

    def one(seed: int) -> Path:
        LOG.info("simulating seed %d", seed)
        trace = run_episode(layout, config, spec1, spec2, seed)
        path = outdir / f"{stem}_{seed}{TRACE_SUFFIX}"
        _atomic_write_text(path, trace_to_text(trace))
        return path

    workers = max(1, min(args.jobs, len(seeds)))
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        paths = list(pool.map(one, seeds))
    for path in paths:
        print(path)
    return 0


def _formats(arg: str) -> list:
    return list(REPORT_FORMATS) if arg == "all" else [arg]


def cmd_analyze(args) -> int:
    schema = build_interaction_schema(
        include_counter_empty=args.counter_empty == "on"
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    formats = _formats(args.format)

    reports = []
    for trace_path in args.traces:
        LOG.info("analyzing %s", trace_path)
        trace = read_trace(trace_path)
        ledger = analyze_trace(trace, schema)
        label = Path(trace_path).name.removesuffix(TRACE_SUFFIX)
        report = build_report(ledger, mode=args.denominator, label=label)
        reports.append(report)
        if args.write_ledgers:
            _atomic_write_text(
                outdir / f"{label}.ledger.json",
                json.dumps(ledger.to_dict(), sort_keys=True, indent=2) + "\n",
            )
        for fmt in formats:
            path = outdir / f"{label}{REPORT_FORMATS[fmt]}"
            _atomic_write_text(path, _report_text(report, fmt))
            print(path)

    if len(reports) > 1:
        summary = aggregate(reports)
        for fmt in formats:
            path = outdir / f"summary{REPORT_FORMATS[fmt]}"
            _atomic_write_text(path, _report_text(summary, fmt))
            print(path)
    return 0


def cmd_report(args) -> int:
    reports = [read_report(p) for p in args.reports]
    summary = aggregate(reports)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for fmt in _formats(args.format):
        path = outdir / f"summary{REPORT_FORMATS[fmt]}"
        _atomic_write_text(path, _report_text(summary, fmt))
        print(path)
    return 0


def cmd_schema(args) -> int:
    schema = build_interaction_schema(
        include_counter_empty=args.counter_empty == "on"
    )
    payload = {"schema": schema.to_dict(), **vocabulary_dump()}
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        _atomic_write_text(Path(args.out), text)
        print(args.out)
    else:
        sys.stdout.write(text)
    return 0


def _add_analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--denominator",
        choices=["subtask-actions", "all-actions"],
        default="subtask-actions",
        help="action count used as the interdependence share denominator",
    )
    p.add_argument(
        "--counter-empty",
        choices=["on", "off"],
        default="on",
        help="whether counter-empty can link the two agents' actions",
    )
    p.add_argument(
        "--format",
        choices=["json", "csv", "markdown", "all"],
        default="all",
        help="report formats to write",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interdep",
        description="Simulate two-cook kitchen episodes and audit their cooperation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="play seeded episodes and write traces")
    sim.add_argument("--layout", required=True, help="path to a .layout grid file")
    sim.add_argument("--p1", required=True, help="policy spec for agent 1")
    sim.add_argument("--p2", required=True, help="policy spec for agent 2")
    sim.add_argument("--seeds", default="1", help="seed N or inclusive range A..B")
    sim.add_argument("--target-soups", type=int, default=3)
    sim.add_argument("--horizon", type=int, default=1000)
    sim.add_argument("--cook-time", type=int, default=20)
    sim.add_argument("--reward-per-soup", type=int, default=20)
    sim.add_argument("--out", default=".", help="output directory")
    sim.add_argument("--jobs", type=int, default=min(8, os.cpu_count() or 1))
    sim.set_defaults(func=cmd_simulate)

    an = sub.add_parser("analyze", help="replay traces into cooperation reports")
    an.add_argument("traces", nargs="+", help="trace files to analyze")
    an.add_argument("--out", default=".", help="output directory")
    an.add_argument("--write-ledgers", action="store_true", help="also dump ledgers")
    _add_analysis_flags(an)
    an.set_defaults(func=cmd_analyze)

    rep = sub.add_parser("report", help="aggregate previously written report JSONs")
    rep.add_argument("reports", nargs="+", help="per-episode .report.json files")
    rep.add_argument("--out", default=".", help="output directory")
    rep.add_argument(
        "--format",
        choices=["json", "csv", "markdown", "all"],
        default="all",
    )
    rep.set_defaults(func=cmd_report)

    sch = sub.add_parser("schema", help="dump the vocabulary and subtask templates")
    sch.add_argument("--counter-empty", choices=["on", "off"], default="on")
    sch.add_argument("--out", default=None, help="write to a file instead of stdout")
    sch.set_defaults(func=cmd_schema)

    return parser


def main(argv: Optional[list] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InterdepError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
