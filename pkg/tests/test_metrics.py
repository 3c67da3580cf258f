import numpy as np
import pytest

from domain.errors import ZeroWindow
from domain.metrics import (
    ThroughputSeries, avg_delay, avg_jitter, avg_throughput, compute_all, flow_metrics, loss_rate, record_of,
    throughput_series,
)
from domain.models import DeliveryRecord, FlowRecord


def deliveries_with_delays(delays_us, gap=1000):
    return [DeliveryRecord(seq=i, size=200, created_at=i * gap, delivered_at=i * gap + d) for i, d in enumerate(delays_us)]


def test_throughput_of_one_second_of_packets():
    deliveries = [DeliveryRecord(seq=i, size=200, created_at=i * 1000, delivered_at=i * 1000) for i in range(1000)]
    assert avg_throughput(deliveries, 1_000_000) == 1_600_000.0


def test_throughput_zero_window_raises():
    with pytest.raises(ZeroWindow):
        avg_throughput([], 0)


def test_loss_rate():
    assert loss_rate(3, 1) == pytest.approx(1 / 3)
    assert loss_rate(0, 0) == 0.0
    assert loss_rate(10, 0) == 0.0


def test_delay_and_jitter_examples():
    d = deliveries_with_delays([10_000, 14_000, 12_000])
    assert avg_delay(d) == pytest.approx(0.012)
    assert avg_jitter(d) == pytest.approx(0.003)


def test_jitter_of_constant_delay_is_zero():
    assert avg_jitter(deliveries_with_delays([5000] * 10)) == 0.0


def test_empty_and_single_delivery_conventions():
    assert avg_delay([]) == 0.0
    assert avg_jitter([]) == 0.0
    assert avg_jitter(deliveries_with_delays([7000])) == 0.0


def test_jitter_is_shift_invariant():
    rng = np.random.default_rng(11)
    delays = [int(x) for x in rng.integers(1_000, 90_000, size=200)]
    base = avg_jitter(deliveries_with_delays(delays))
    shifted = avg_jitter(deliveries_with_delays([x + 12_345 for x in delays]))
    assert base == shifted


def test_flow_metrics_orders_by_seq():
    d = deliveries_with_delays([10_000, 14_000, 12_000])
    record = record_of(2, sent=4, dropped=1, deliveries=list(reversed(d)))
    m = flow_metrics(record, 1_000_000)
    assert m.avg_jitter == pytest.approx(0.003)
    assert (m.sent, m.delivered, m.dropped, m.residual) == (4, 3, 1, 0)
    assert m.loss_rate == pytest.approx(0.25)
    assert m.avg_throughput == 4800.0


def test_compute_all_sorted_by_flow():
    records = [FlowRecord(flow_id=f) for f in (5, 1, 3)]
    assert [m.flow_id for m in compute_all(records, 1_000_000)] == [1, 3, 5]


def test_flow_without_deliveries():
    m = flow_metrics(FlowRecord(flow_id=1, sent=3, dropped=3), 1_000_000)
    assert (m.avg_throughput, m.avg_delay, m.avg_jitter, m.loss_rate) == (0.0, 0.0, 0.0, 1.0)


def test_throughput_series_buckets_by_second():
    d = [
        DeliveryRecord(0, 200, 0, 500_000),
        DeliveryRecord(1, 200, 0, 999_999),
        DeliveryRecord(2, 200, 0, 1_000_000),
        DeliveryRecord(3, 200, 0, 2_000_000),  # end-of-run instant folds into the last second
    ]
    assert throughput_series(d, 2_000_000).tolist() == [3200, 3200]
    assert throughput_series([], 2_500_000).tolist() == [0, 0, 0]


def test_running_totals_match_list_formulas_exactly():
    rng = np.random.default_rng(5)
    delays = [int(x) for x in rng.integers(1_000, 90_000, size=500)]
    d = deliveries_with_delays(delays)
    m = flow_metrics(record_of(1, sent=600, dropped=100, deliveries=d), 200_000_000)
    assert m.avg_throughput == avg_throughput(d, 200_000_000)
    assert m.avg_delay == avg_delay(d)
    assert m.avg_jitter == avg_jitter(d)


def test_deliver_bridges_drops_in_jitter():
    record = FlowRecord(flow_id=1)
    record.deliver(0, 200, 5000)
    record.deliver(2, 200, 8000)
    record.deliver(3, 200, 6000)
    assert (record.delivered, record.delivered_bits, record.delay_sum, record.jitter_sum) == (3, 4800, 19000, 5000)
    assert record.last_seq == 3


def test_zero_window_can_report_zero_throughput():
    record = FlowRecord(flow_id=1, sent=1)
    record.deliver(0, 200, 0)
    with pytest.raises(ZeroWindow):
        flow_metrics(record, 0)
    assert flow_metrics(record, 0, empty_window_ok=True).avg_throughput == 0.0


def test_series_accumulates_per_flow():
    series = ThroughputSeries(2_000_000)
    series.add(1, 5000, 1600)
    series.add(1, 1_005_000, 1600)
    series.add(2, 2_000_000, 800)
    assert series.of(1).tolist() == [1600, 1600]
    assert series.of(2).tolist() == [0, 800]
    assert series.of(9).tolist() == [0, 0]
