"""Command line interface: ``test``, ``simulate`` and ``chart`` subcommands.

Exit codes: 0 success, 2 parse/domain error, 3 degenerate sample.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .adjust import METHODS
from .chart import chart_spec_from_report, render_chart
from .errors import DegenerateSampleError, DomainError
from .ingest import load_path
from .report import analyze, emit_report, format_report, parse_report
from .simlab import (PRESETS, SimulationSpec, StudyCell, StudyReport, format_study, run_cell,
                     run_preset)

log = logging.getLogger("waerden_chart")

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_DEGENERATE = 3


def _methods(text: str) -> tuple[str, ...]:
    methods = tuple(m.strip().lower() for m in text.split(",") if m.strip())
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"methods must be drawn from {','.join(METHODS)}")
    return methods


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waerden-chart",
        description="Van der Waerden test with adjusted p-value decision charts.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="analyse a CSV file")
    t.add_argument("file", type=Path)
    t.add_argument("--wide", action="store_true", help="one column per group instead of group,value rows")
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--offset-c", type=float, default=0.0, help="score offset c (0 = Waerden, 0.375 = Blom)")
    t.add_argument("--methods", type=_methods, default=("bh", "bonferroni"))
    t.add_argument("--posthoc", action="store_true", help="add Conover-Iman pairwise comparisons")
    t.add_argument("--json", type=Path, help="write the JSON report here")
    t.add_argument("--chart", type=Path, help="write the SVG chart here")
    t.add_argument("--log-scale", action="store_true")

    s = sub.add_parser("simulate", help="Monte Carlo studies")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--config", type=Path, help="JSON simulation spec")
    s.add_argument("--kind", choices=("type1", "power", "moments"), default="type1",
                   help="study type for --config")
    s.add_argument("--replications", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--json", type=Path)

    c = sub.add_parser("chart", help="re-render the chart of a saved JSON report")
    c.add_argument("report", type=Path)
    c.add_argument("--out", type=Path, required=True)
    c.add_argument("--log-scale", action="store_true")
    return parser


def _cmd_test(args) -> int:
    sample = load_path(args.file, wide=args.wide)
    report = analyze(sample, alpha=args.alpha, offset_c=args.offset_c, methods=args.methods,
                     posthoc=args.posthoc, source=args.file.name)
    rendered = render_chart(chart_spec_from_report(report, args.log_scale))
    sys.stdout.write(format_report(report))
    sys.stdout.write("\n" + rendered.text)
    if args.json:
        args.json.write_text(emit_report(report), encoding="utf-8")
    if args.chart:
        args.chart.write_text(rendered.svg, encoding="utf-8")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    if args.replications < 1:
        raise DomainError("--replications must be >= 1")
    if args.workers < 1:
        raise DomainError("--workers must be >= 1")
    if args.preset:
        study = run_preset(args.preset, args.replications, args.seed, args.workers,
                           progress=lambda cell: log.info("done %s", cell.spec.name))
    else:
        try:
            raw = json.loads(args.config.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON in {args.config}: {exc.msg}") from None
        raw.setdefault("replications", args.replications)
        raw.setdefault("seed", args.seed)
        if args.kind == "moments":
            raw.setdefault("alphas", [])
        spec = SimulationSpec.from_dict(raw)
        cell = StudyCell(args.kind, spec.name or "custom", spec)
        report = run_cell(cell, args.workers)
        study = StudyReport("custom", spec.seed, spec.replications, ((cell, report),), report.wall_time)
    sys.stdout.write(format_study(study))
    print(f"wall time {study.wall_time:.1f} s", file=sys.stderr)
    if args.json:
        args.json.write_text(json.dumps(study.to_dict(), indent=2, allow_nan=False) + "\n",
                             encoding="utf-8")
    return EXIT_OK


def _cmd_chart(args) -> int:
    report = parse_report(args.report.read_text(encoding="utf-8"))
    rendered = render_chart(chart_spec_from_report(report, args.log_scale))
    args.out.write_text(rendered.svg, encoding="utf-8")
    sys.stdout.write(rendered.text)
    return EXIT_OK


COMMANDS = {"test": _cmd_test, "simulate": _cmd_simulate, "chart": _cmd_chart}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_DOMAIN
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except DegenerateSampleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
