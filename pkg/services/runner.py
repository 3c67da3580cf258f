"""
Run orchestration for the command line: a single run, the baseline-vs-QoE
comparison and offline trace analysis. Reports are written whole at the end;
traces stream into a temp file that is moved into place when the run ends.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from components.report import comparison_table, metrics_csv, ordered_rows, series_csv
from domain.config import ScenarioConfig, with_overrides
from domain.metrics import compute_all
from domain.models import ControllerMode, FlowMetrics, SimTime
from domain.simulation import SimulationResult, simulate

from .telemetry import log_run
from .trace import TraceWriter, parse_file, write_atomic

logger = logging.getLogger(__name__)

METRIC_FIELDS = ("avg_throughput", "loss_rate", "avg_delay", "avg_jitter")


@dataclass
class RunOutcome:
    result: SimulationResult
    csv_text: str
    trace_path: Optional[Path] = None
    report_path: Optional[Path] = None
    wall_seconds: float = 0.0

    @property
    def metrics(self) -> List[FlowMetrics]:
        return self.result.metrics


@dataclass
class ComparisonRow:
    flow_id: int
    baseline: FlowMetrics
    qoe: FlowMetrics

    @property
    def deltas(self) -> Dict[str, float]:
        """QoE minus Baseline per metric."""
        return {k: getattr(self.qoe, k) - getattr(self.baseline, k) for k in METRIC_FIELDS}


@dataclass
class ComparisonReport:
    rows: List[ComparisonRow]
    csv_text: str
    outcomes: Dict[ControllerMode, RunOutcome] = field(default_factory=dict)
    wall_seconds: float = 0.0

    def table(self) -> str:
        return comparison_table([(r.baseline, r.qoe) for r in self.rows])


def _suffixed(path: Optional[str], mode: ControllerMode) -> Optional[Path]:
    if path is None:
        return None
    p = Path(path)
    return p.with_name(f"{p.stem}.{mode.value}{p.suffix}")


def _execute(cfg: ScenarioConfig, trace_path: Optional[Path]) -> Tuple[SimulationResult, float]:
    """One run, streaming its trace when a path is given. Module level so a process pool can pickle it."""
    started = time.perf_counter()
    if trace_path is None:
        result = simulate(cfg)
    else:
        with TraceWriter(trace_path, duration=cfg.duration_us, mode=cfg.controller.mode.value) as writer:
            result = simulate(cfg, emit=writer)
    wall = time.perf_counter() - started
    logger.info("%s run finished: %d events in %.2f s", result.mode.value, result.events, wall)
    return result, wall


def run(
    cfg: ScenarioConfig,
    mode: ControllerMode | str | None = None,
    trace_path: Optional[Path | str] = None,
    report_path: Optional[Path | str] = None,
    telemetry: bool = False,
) -> RunOutcome:
    """One deterministic simulation; writes the trace and the CSV report if paths are given."""
    if mode is not None:
        cfg = with_overrides(cfg, mode=mode)
    trace_path = Path(trace_path) if trace_path else (Path(cfg.out_trace) if cfg.out_trace else None)
    report_path = Path(report_path) if report_path else (Path(cfg.out_report) if cfg.out_report else None)
    result, wall = _execute(cfg, trace_path)
    if telemetry:
        log_run(cfg, result, wall)
    csv_text = metrics_csv((result.mode.value, m) for m in result.metrics)
    if report_path is not None:
        write_atomic(report_path, csv_text)
    return RunOutcome(result, csv_text, trace_path, report_path, wall)


def compare(
    cfg: ScenarioConfig,
    trace_path: Optional[Path | str] = None,
    report_path: Optional[Path | str] = None,
    telemetry: bool = False,
    parallel: bool = True,
) -> ComparisonReport:
    """Baseline and QoE with one config and one seed; side-by-side CSV.

    With `parallel` the two runs go to separate worker processes; the results
    are identical either way.
    """
    started = time.perf_counter()
    trace_base = str(trace_path) if trace_path else cfg.out_trace
    report = Path(report_path) if report_path else (Path(cfg.out_report) if cfg.out_report else None)
    modes = (ControllerMode.BASELINE, ControllerMode.QOE)
    configs = [with_overrides(cfg, mode=m) for m in modes]
    traces = [_suffixed(trace_base, m) for m in modes]

    if parallel:
        with ProcessPoolExecutor(max_workers=len(modes)) as pool:
            done = dict(zip(modes, pool.map(_execute, configs, traces)))
    else:
        done = {m: _execute(c, t) for m, c, t in zip(modes, configs, traces)}

    base_res, qoe_res = done[ControllerMode.BASELINE][0], done[ControllerMode.QOE][0]
    csv_text = metrics_csv(ordered_rows([
        (ControllerMode.BASELINE.value, base_res.metrics),
        (ControllerMode.QOE.value, qoe_res.metrics),
    ]))
    qoe_by_flow = {m.flow_id: m for m in qoe_res.metrics}
    rows = [ComparisonRow(b.flow_id, b, qoe_by_flow[b.flow_id]) for b in base_res.metrics]

    outcomes: Dict[ControllerMode, RunOutcome] = {}
    for m, c, t in zip(modes, configs, traces):
        res, wall = done[m]
        if telemetry:
            log_run(c, res, wall)
        outcomes[m] = RunOutcome(res, metrics_csv((m.value, x) for x in res.metrics), t, wall_seconds=wall)
    if report is not None:
        write_atomic(report, csv_text)
    return ComparisonReport(
        rows=rows, csv_text=csv_text, outcomes=outcomes, wall_seconds=time.perf_counter() - started,
    )


def analyze(
    trace_path: Path | str,
    report_path: Optional[Path | str] = None,
    duration: Optional[SimTime] = None,
    mode_label: Optional[str] = None,
) -> Tuple[List[FlowMetrics], str]:
    """Parse a trace file and compute the same metrics and CSV as a live run.

    A headerless trace whose events all sit at t=0 has no window to divide
    by; its throughput is reported as zero. An explicit zero `duration`
    still raises ZeroWindow.
    """
    parsed = parse_file(trace_path)
    window = parsed.window(duration)
    inferred = parsed.window_is_inferred(duration)
    if inferred and window == 0 and parsed.records:
        logger.warning("%s: no duration header and no event after t=0; throughput reported as 0", trace_path)
    metrics = compute_all(parsed.records.values(), window, empty_window_ok=inferred) if parsed.records else []
    label = mode_label or parsed.mode or "trace"
    csv_text = metrics_csv((label, m) for m in metrics)
    if report_path is not None:
        write_atomic(Path(report_path), csv_text)
    return metrics, csv_text


def series_dump(result: SimulationResult, path: Path | str) -> None:
    series = [(fid, result.series.of(fid).tolist()) for fid in sorted(result.records)]
    write_atomic(Path(path), series_csv(series))
