"""
Report rendering: the per-flow CSV and a console comparison table.
Formatting only; no simulation logic.
"""
from __future__ import annotations

import csv
import io
from typing import Iterable, List, Sequence, Tuple

from domain.models import FlowMetrics

CSV_COLUMNS = ["flow_id", "mode", "avg_throughput", "loss_rate", "avg_delay", "avg_jitter"]


def _row(mode: str, m: FlowMetrics) -> List[str]:
    return [
        str(m.flow_id),
        mode,
        f"{m.avg_throughput:.3f}",
        f"{m.loss_rate:.6f}",
        # no deliveries -> delay is absent rather than 0
        f"{m.avg_delay:.6f}" if m.delivered else "",
        f"{m.avg_jitter:.6f}",
    ]


def metrics_csv(rows: Iterable[Tuple[str, FlowMetrics]]) -> str:
    """rows: (mode, metrics) pairs, already in output order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for mode, m in rows:
        writer.writerow(_row(mode, m))
    return buf.getvalue()


def ordered_rows(by_mode: Sequence[Tuple[str, Sequence[FlowMetrics]]]) -> List[Tuple[str, FlowMetrics]]:
    """flow_id ascending, modes in the given order within a flow."""
    rows = [(order, mode, m) for order, (mode, ms) in enumerate(by_mode) for m in ms]
    rows.sort(key=lambda r: (r[2].flow_id, r[0]))
    return [(mode, m) for _, mode, m in rows]


def comparison_table(pairs: Sequence[Tuple[FlowMetrics, FlowMetrics]]) -> str:
    """Console table: baseline vs qoe per flow with deltas."""
    head = f"{'flow':>4}  {'thr base':>12} {'thr qoe':>12}  {'loss base':>9} {'loss qoe':>9}  " \
           f"{'delay base':>10} {'delay qoe':>10}  {'jit base':>9} {'jit qoe':>9}"
    lines = [head, "-" * len(head)]
    for base, qoe in pairs:
        lines.append(
            f"{base.flow_id:>4}  {base.avg_throughput / 1e6:>10.4f}Mb {qoe.avg_throughput / 1e6:>10.4f}Mb  "
            f"{base.loss_rate:>9.4f} {qoe.loss_rate:>9.4f}  "
            f"{base.avg_delay * 1e3:>8.3f}ms {qoe.avg_delay * 1e3:>8.3f}ms  "
            f"{base.avg_jitter * 1e3:>7.3f}ms {qoe.avg_jitter * 1e3:>7.3f}ms"
        )
    return "\n".join(lines)


def series_csv(series: Iterable[Tuple[int, Sequence[int]]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["flow_id", "second", "bits"])
    for flow_id, values in series:
        for second, bits in enumerate(values):
            writer.writerow([flow_id, second, int(bits)])
    return buf.getvalue()
