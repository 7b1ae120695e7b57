"""Reordering buffer behavior, including the golden reorder sequence."""
from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from mswjoin import KSlackBuffer, StreamClock
from conftest import feed


def run_buffer(ts_list, k):
    buf = KSlackBuffer(k=k)
    emitted, per_push = [], []
    for e in feed((1, ts) for ts in ts_list):
        out = buf.push(e)
        per_push.append([t.ts for t in out])
        emitted.extend(out)
    return buf, emitted, per_push


def residual_delays(emitted):
    """Delays the emitted sequence would show to a fresh downstream clock."""
    clock = StreamClock()
    return [clock.observe(e) for e in emitted]


def test_golden_reorder_sequence():
    # input ts 1,4,3,5,7,8,6,9 with one unit of slack: the 3 is repaired,
    # the 6 is beyond the slack and stays late on release
    buf, emitted, _ = run_buffer([1, 4, 3, 5, 7, 8, 6, 9], k=1)
    assert [e.ts for e in emitted] == [1, 3, 4, 5, 7, 6, 8]
    assert [e.ts for e in buf.flush()] == [9]


def test_golden_reorder_residual_delay():
    _, emitted, _ = run_buffer([1, 4, 3, 5, 7, 8, 6, 9], k=1)
    res = residual_delays(emitted)
    assert res == [0, 0, 0, 0, 0, 1, 0]   # only the 6 stays disordered
    by_ts = dict(zip((e.ts for e in emitted), res))
    assert by_ts[6] == 1


def test_input_delay_annotations():
    _, emitted, _ = run_buffer([1, 4, 3, 5, 7, 8, 6, 9], k=1)
    flushed = {e.ts: e.delay for e in emitted}
    assert flushed[3] == 1    # arrived when local time was 4
    assert flushed[6] == 2    # arrived when local time was 8
    assert all(d == 0 for ts, d in flushed.items() if ts not in (3, 6))


def test_release_waits_for_clock_advance():
    # an overdue tuple is not released by an arrival that fails to
    # advance local time; the next advancing arrival releases both
    buf = KSlackBuffer(k=2)
    e1, e2, e3 = feed([(1, 10), (1, 5), (1, 20)])
    assert buf.push(e1) == []         # 10 not yet due (local 10, bound 8)
    assert buf.push(e2) == []         # late, clock stays at 10
    out = buf.push(e3)
    assert [e.ts for e in out] == [5, 10]
    assert [e.ts for e in buf.flush()] == [20]


def test_residual_can_beat_the_bound():
    # the ts=5 tuple above has delay 5 and k=2, but is emitted in order:
    # the bound max(0, delay - k) is an upper limit, not an identity
    buf = KSlackBuffer(k=2)
    emitted = []
    for e in feed([(1, 10), (1, 5), (1, 20)]):
        emitted.extend(buf.push(e))
    emitted.extend(buf.flush())
    assert residual_delays(emitted) == [0, 0, 0]


def test_zero_slack_still_waits_for_advance():
    _, emitted, per_push = run_buffer([1, 4, 3, 5], k=0)
    assert per_push == [[1], [4], [], [3, 5]]
    assert [e.ts for e in emitted] == [1, 4, 3, 5]


def test_shrinking_slack_releases_immediately():
    buf = KSlackBuffer(k=5)
    for e in feed([(1, 9), (1, 10)]):
        assert buf.push(e) == []
    assert len(buf) == 2
    out = buf.set_k(0)
    assert [e.ts for e in out] == [9, 10]
    assert len(buf) == 0


def test_growing_slack_releases_nothing():
    buf = KSlackBuffer(k=0)
    buf.push(feed([(1, 10)])[0])
    buf.push(feed([(1, 15)])[0])
    assert buf.set_k(100) == []


def test_flush_orders_by_ts_then_seq():
    buf = KSlackBuffer(k=100)
    for e in feed([(1, 7), (1, 3), (1, 7), (1, 5)]):
        buf.push(e)
    assert [(e.ts, e.seq) for e in buf.flush()] == [(3, 2), (5, 4), (7, 1),
                                                    (7, 3)]


def test_negative_slack_rejected():
    with pytest.raises(ValueError):
        KSlackBuffer(k=-1)
    with pytest.raises(ValueError):
        KSlackBuffer(k=1).set_k(-2)


delays_strategy = st.lists(st.integers(0, 30), min_size=1, max_size=60)


@given(delays_strategy, st.integers(0, 35))
@settings(max_examples=200)
def test_conservation_and_residual_bound(delays, k):
    # arrival ts = ideal emission time minus a bounded delay
    ts_list = [max(1, 10 * (i + 1) - d) for i, d in enumerate(delays)]
    buf, emitted, _ = run_buffer(ts_list, k)
    emitted.extend(buf.flush())
    assert sorted(e.ts for e in emitted) == sorted(ts_list)
    assert len({e.seq for e in emitted}) == len(ts_list)
    for e, res in zip(emitted, residual_delays(emitted)):
        assert res <= max(0, e.delay - k)


@given(delays_strategy)
@settings(max_examples=100)
def test_full_slack_sorts_output(delays):
    ts_list = [max(1, 10 * (i + 1) - d) for i, d in enumerate(delays)]
    buf, emitted, _ = run_buffer(ts_list, k=max(delays))
    emitted.extend(buf.flush())
    keys = [e.order_key() for e in emitted]
    assert keys == sorted(keys)


@given(delays_strategy, st.integers(0, 30), st.integers(1, 5))
@settings(max_examples=100)
def test_more_slack_never_more_disorder(delays, k, extra):
    ts_list = [max(1, 10 * (i + 1) - d) for i, d in enumerate(delays)]

    def late_count(k_val):
        buf, emitted, _ = run_buffer(ts_list, k_val)
        emitted.extend(buf.flush())
        return sum(1 for r in residual_delays(emitted) if r > 0)

    assert late_count(k + extra) <= late_count(k)
