import io
import tracemalloc

import pytest

from domain.errors import MalformedLine, OrphanEvent, SinkWriteError
from domain.metrics import compute_all
from domain.models import TraceEvent, TraceKind
from services.trace import TraceWriter, emit, parse, parse_file

SIX_LINES = """\
s 0.000000 1 0 200
s 0.001000 1 1 200
s 0.002000 1 2 200
d 0.002000 1 2 200
r 0.005000 1 0 200
r 0.005000 1 1 200
"""

# Two flows; flow 1 sends 200-byte packets, flow 2 100-byte packets.
# Hand-computed per flow:
#   flow 1: sent 6, dropped 1 (seq 3), delays 5000/4000/5500/6000 us,
#           mean 5125 us, jitter (1000 + 1500 + 500) / 3 = 1000 us
#   flow 2: sent 5, dropped 1 (seq 3), delays 4000/3500/5000 us,
#           mean 12500/3 us, jitter (500 + 1500) / 2 = 1000 us
TWENTY_LINES = """\
# duration_us 10000
s 0.000000 1 0 200
s 0.000000 2 0 100
s 0.001000 1 1 200
s 0.001500 2 1 100
s 0.002000 1 2 200
s 0.003000 1 3 200
d 0.003000 1 3 200
s 0.003000 2 2 100
r 0.004000 2 0 100
s 0.004000 1 4 200
r 0.005000 1 0 200
r 0.005000 1 1 200
r 0.005000 2 1 100
s 0.006000 2 3 100
d 0.006000 2 3 100
r 0.007500 1 2 200
r 0.008000 2 2 100
s 0.009000 1 5 200
s 0.009500 2 4 100
r 0.010000 1 4 200
"""


def test_trace_line_format():
    sink = io.StringIO()
    emit(TraceEvent(TraceKind.SENT, 1500, 1, 0, 200), sink)
    emit(TraceEvent(TraceKind.RECEIVED, 200_000_000, 5, 12, 200), sink)
    assert sink.getvalue() == "s 0.001500 1 0 200\nr 200.000000 5 12 200\n"


def test_emit_to_closed_sink_raises_sink_error():
    sink = io.StringIO()
    sink.close()
    with pytest.raises(SinkWriteError):
        emit(TraceEvent(TraceKind.SENT, 0, 1, 0, 200), sink)


def test_six_line_hand_trace():
    parsed = parse(SIX_LINES.splitlines())
    record = parsed.records[1]
    assert (record.sent, record.delivered, record.dropped) == (3, 2, 1)
    (m,) = compute_all(parsed.records.values(), parsed.window())
    assert m.loss_rate == pytest.approx(1 / 3)
    assert parsed.duration is None
    assert parsed.window() == 5000


def test_twenty_line_oracle_trace():
    parsed = parse(TWENTY_LINES.splitlines())
    assert parsed.duration == 10_000
    assert parsed.open_packets == 2
    f1, f2 = compute_all(parsed.records.values(), parsed.window())

    assert (f1.sent, f1.delivered, f1.dropped, f1.residual) == (6, 4, 1, 1)
    assert f1.loss_rate == pytest.approx(1 / 6)
    assert f1.avg_delay == pytest.approx(0.005125, abs=1e-12)
    assert f1.avg_jitter == pytest.approx(0.001, abs=1e-12)
    assert f1.avg_throughput == pytest.approx(640_000.0)

    assert (f2.sent, f2.delivered, f2.dropped, f2.residual) == (5, 3, 1, 1)
    assert f2.loss_rate == pytest.approx(0.2)
    assert f2.avg_delay == pytest.approx(12_500 / 3 / 1e6, abs=1e-12)
    assert f2.avg_jitter == pytest.approx(0.001, abs=1e-12)
    assert f2.avg_throughput == pytest.approx(240_000.0)


def test_window_override_wins_over_header():
    parsed = parse(TWENTY_LINES.splitlines())
    assert parsed.window(20_000) == 20_000
    (f1, _) = compute_all(parsed.records.values(), parsed.window(20_000))
    assert f1.avg_throughput == pytest.approx(320_000.0)


def test_empty_trace_has_no_flows():
    parsed = parse([])
    assert parsed.records == {}
    assert parse(["# only a comment", ""]).records == {}


def test_orphan_receive_is_rejected():
    with pytest.raises(OrphanEvent) as exc:
        parse(["s 0.000000 1 0 200", "r 0.005000 1 9 200"])
    assert exc.value.line_no == 2
    assert (exc.value.flow_id, exc.value.seq) == (1, 9)


def test_corrupt_line_reports_its_number():
    lines = SIX_LINES.splitlines() + ["x 0.1 1 1"]
    with pytest.raises(MalformedLine) as exc:
        parse(lines)
    assert exc.value.line_no == 7


@pytest.mark.parametrize(
    "bad",
    [
        "s 0.000000 1 0",
        "q 0.000000 1 0 200",
        "s -1.000000 1 0 200",
        "s 0.0000001 1 0 200",
        "s abc 1 0 200",
        "s 0.000000 one 0 200",
    ],
)
def test_malformed_fields(bad):
    with pytest.raises(MalformedLine):
        parse([bad])


def test_time_going_backwards_is_rejected():
    with pytest.raises(MalformedLine):
        parse(["s 0.002000 1 0 200", "s 0.001000 1 1 200"])


def test_duplicate_sequence_is_rejected():
    with pytest.raises(MalformedLine):
        parse(["s 0.000000 1 0 200", "s 0.001000 1 0 200"])


def test_size_mismatch_is_rejected():
    with pytest.raises(MalformedLine):
        parse(["s 0.000000 1 0 200", "r 0.005000 1 0 100"])


def test_writer_headers_and_file(tmp_path):
    path = tmp_path / "nested" / "run.tr"
    writer = TraceWriter(path, duration=10_000, mode="qoe")
    writer("s", 0, 1, 0, 200)
    writer("r", 5000, 1, 0, 200)
    assert not path.exists()
    writer.close()
    text = path.read_text()
    assert text.splitlines()[:2] == ["# duration_us 10000", "# mode qoe"]
    parsed = parse_file(path)
    assert parsed.mode == "qoe"
    assert parsed.records[1].delivered == 1


def test_writer_without_path_keeps_text_in_memory():
    writer = TraceWriter(None)
    writer("s", 0, 1, 0, 200)
    writer.close()
    assert writer.getvalue() == "s 0.000000 1 0 200\n"


def test_failed_run_leaves_no_trace_behind(tmp_path):
    path = tmp_path / "run.tr"
    with pytest.raises(RuntimeError):
        with TraceWriter(path, duration=10_000) as writer:
            writer("s", 0, 1, 0, 200)
            raise RuntimeError("run failed")
    assert list(tmp_path.iterdir()) == []


@pytest.mark.parametrize(
    "bad",
    [
        "s ١.000000 1 0 200",
        "s 0.٠٠٠٠٠٠ 1 0 200",
        "s 0.000000 ١ 0 200",
        "s 0.000000 1 0 ２００",
    ],
)
def test_non_ascii_digits_are_malformed(bad):
    with pytest.raises(MalformedLine):
        parse([bad])


def test_non_ascii_duration_header_is_malformed():
    with pytest.raises(MalformedLine):
        parse(["# duration_us ١٠"])


def test_out_of_order_delivery_is_rejected():
    lines = ["s 0.000000 1 0 200", "s 0.001000 1 1 200", "r 0.005000 1 1 200", "r 0.005000 1 0 200"]
    with pytest.raises(MalformedLine) as exc:
        parse(lines)
    assert exc.value.line_no == 4


def test_headerless_trace_at_time_zero_has_zero_window():
    parsed = parse(["s 0.000000 1 0 200", "r 0.000000 1 0 200"])
    assert parsed.window() == 0
    assert parsed.window_is_inferred()
    (m,) = compute_all(parsed.records.values(), parsed.window(), empty_window_ok=True)
    assert m.avg_throughput == 0.0
    assert m.delivered == 1


def _long_trace(pairs):
    yield "# duration_us 1000000000"
    for i in range(pairs):
        t = i * 1000
        yield f"s {t // 1_000_000}.{t % 1_000_000:06d} 1 {i} 200"
        yield f"r {(t + 500) // 1_000_000}.{(t + 500) % 1_000_000:06d} 1 {i} 200"


def test_parse_keeps_only_running_totals():
    tracemalloc.start()
    try:
        parsed = parse(_long_trace(100_000))
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    record = parsed.records[1]
    assert (record.sent, record.delivered, record.dropped) == (100_000, 100_000, 0)
    assert record.delay_sum == 100_000 * 500
    assert record.jitter_sum == 0
    assert peak < 1_000_000
