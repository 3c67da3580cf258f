"""
WiMAX UGS uplink simulator - command-line entry point

Thin bootstrapper: parses flags, loads the scenario and routes to
services.runner. All simulation logic lives in domain/.

    python app.py run --mode qoe --out-trace out/qoe.tr --out-report out/qoe.csv
    python app.py compare --config five-ugs-users --out-report out/compare.csv
    python app.py analyze out/qoe.tr --out-report out/qoe_from_trace.csv

Exit codes: 0 success, 1 config error, 2 I/O error, 3 malformed trace.
"""
from __future__ import annotations

import argparse
import math
import sys
from typing import List, Optional

from domain.config import ScenarioConfig, with_overrides
from domain.errors import ConfigInvalid, SinkWriteError, TraceError, ZeroWindow
from domain.models import ControllerMode, seconds_to_us
from services import logs, runner
from services.repository import Repository

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_TRACE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wimax-qoe", description="WiMAX UGS uplink simulator with QoE rate adaptation")
    parser.add_argument("--log-level", default="WARNING", help="DEBUG, INFO, WARNING (default), ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="scenario JSON path or name under data/scenarios (default: built-in five-user scenario)")
        p.add_argument("--seed", type=int)
        p.add_argument("--duration", type=float, help="seconds")
        p.add_argument("--out-trace", help="trace file path (compare writes <stem>.baseline/<stem>.qoe)")
        p.add_argument("--out-report", help="CSV report path")
        p.add_argument("--telemetry", action="store_true", help="append a run record to data/logs/runs.jsonl")

    p_run = sub.add_parser("run", help="one simulation in one controller mode")
    scenario_flags(p_run)
    p_run.add_argument("--mode", choices=[m.value for m in ControllerMode])
    p_run.add_argument("--series", help="also write per-second delivered bits per flow to this CSV")

    p_cmp = sub.add_parser("compare", help="baseline and qoe with identical parameters")
    scenario_flags(p_cmp)
    p_cmp.add_argument("--sequential", action="store_true", help="run the two modes one after the other")

    p_an = sub.add_parser("analyze", help="metrics from an existing trace file")
    p_an.add_argument("trace")
    p_an.add_argument("--out-report", help="CSV report path")
    p_an.add_argument("--duration", type=float, help="throughput window in seconds (default: trace header)")
    return parser


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    # CLI flags > config file > built-in defaults
    cfg = Repository().load_scenario(args.config)
    return with_overrides(
        cfg,
        mode=getattr(args, "mode", None),
        seed=args.seed,
        duration=args.duration,
        out_trace=args.out_trace,
        out_report=args.out_report,
    )


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    outcome = runner.run(cfg, telemetry=args.telemetry)
    if args.series:
        runner.series_dump(outcome.result, args.series)
    if outcome.report_path is None:
        sys.stdout.write(outcome.csv_text)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    report = runner.compare(cfg, telemetry=args.telemetry, parallel=not args.sequential)
    if cfg.out_report is None:
        sys.stdout.write(report.csv_text)
    print(report.table(), file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    duration = None
    if args.duration is not None:
        if not math.isfinite(args.duration):
            raise ConfigInvalid(f"duration: must be a finite number of seconds, got {args.duration}")
        duration = seconds_to_us(args.duration)
    _, csv_text = runner.analyze(args.trace, args.out_report, duration=duration)
    if args.out_report is None:
        sys.stdout.write(csv_text)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "analyze": cmd_analyze}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logs.configure(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TraceError, ZeroWindow) as exc:
        print(f"trace error: {exc}", file=sys.stderr)
        return EXIT_TRACE
    except (SinkWriteError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
