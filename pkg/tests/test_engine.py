"""Buffer -> merge -> join pipeline: slack effects, accounting, draining."""
from __future__ import annotations

import random

import pytest

from mswjoin import (CrossPredicate, EquiPredicate, JoinPipeline, WindowSpec,
                     compute_truth, output_in_order_check)
from conftest import feed, tup

VV = EquiPredicate([((1, "v"), (2, "v"))])


def run_pipeline(pipeline, trace):
    results = []
    for e in trace:
        results.extend(pipeline.push(e).results)
    results.extend(pipeline.finish().results)
    return results


def max_needed_k(trace):
    local = {}
    worst = 0
    for e in trace:
        local[e.stream] = max(local.get(e.stream, 0), e.ts)
        worst = max(worst, local[e.stream] - e.ts)
    return worst


# Stream 1 swaps its ts-2 and ts-3 tuples while stream 2 stays ordered;
# with both streams live the merge cannot hide that internal disorder.
SWAP_TRACE = feed([
    (2, 1, {"v": 1}), (1, 1, {"v": 1}),
    (2, 2, {"v": 2}), (1, 3, {"v": 3}),
    (2, 3, {"v": 3}), (1, 2, {"v": 2}),
    (2, 4, {"v": 4}), (1, 4, {"v": 4}),
])


def test_zero_slack_loses_the_swapped_pair():
    pipeline = JoinPipeline(WindowSpec((1, 1)), VV, k=0)
    results = run_pipeline(pipeline, SWAP_TRACE)
    truth = compute_truth(SWAP_TRACE, WindowSpec((1, 1)), VV)
    assert len(truth) == 4
    got = {r.identity() for r in results}
    assert got == set(truth.by_identity) - {((1, 6), (2, 3))}
    assert pipeline.join.n_dropped == 1


def test_enough_slack_recovers_everything():
    for k in (2, 3, 10):
        pipeline = JoinPipeline(WindowSpec((1, 1)), VV, k=k)
        results = run_pipeline(pipeline, SWAP_TRACE)
        truth = compute_truth(SWAP_TRACE, WindowSpec((1, 1)), VV)
        assert {(r.identity(), r.ts) for r in results} \
            == {(i, ts) for i, ts in truth.by_identity.items()}
        assert output_in_order_check(results)


def test_merge_absorbs_cross_stream_silence():
    # one stream's late burst is held back by the other stream's frontier,
    # so even zero slack recovers results a bare join would drop
    trace = feed([
        (1, 1, {"v": 1}), (2, 1, {"v": 1}),
        (2, 2, {"v": 2}), (1, 3, {"v": 2}),
        (2, 3, {"v": 3}), (1, 5, {"v": 5}),
        (1, 6, {"v": 2}), (1, 4, {"v": 3}),
        (1, 8, {"v": 4}), (2, 7, {"v": 5}),
    ])
    pipeline = JoinPipeline(WindowSpec((2, 2)), VV, k=0)
    results = run_pipeline(pipeline, trace)
    truth = compute_truth(trace, WindowSpec((2, 2)), VV)
    assert {(r.identity(), r.ts) for r in results} \
        == {(i, ts) for i, ts in truth.by_identity.items()}
    assert len(results) == 4


def test_per_stream_slack_only_where_needed():
    uniform = JoinPipeline(WindowSpec((1, 1)), VV, k=2)
    het = JoinPipeline(WindowSpec((1, 1)), VV, k=(2, 0))
    assert het.k == 2
    a = {(r.identity(), r.ts) for r in run_pipeline(uniform, SWAP_TRACE)}
    b = {(r.identity(), r.ts) for r in run_pipeline(het, SWAP_TRACE)}
    assert a == b and len(a) == 4


def test_slack_vector_validation():
    with pytest.raises(ValueError):
        JoinPipeline(WindowSpec((1, 1)), VV, k=(1,))
    with pytest.raises(ValueError):
        JoinPipeline(WindowSpec((1, 1)), VV, k=(1, -1))
    with pytest.raises(ValueError):
        JoinPipeline(WindowSpec((1, 1)), VV, k=-1)


def test_set_k_shrink_drains_immediately():
    pipeline = JoinPipeline(WindowSpec((5,)), CrossPredicate(), k=3)
    assert pipeline.push(tup(1, 1, 5)).results == []
    assert pipeline.push(tup(1, 2, 6)).results == []
    out = pipeline.set_k(0)
    assert [(r.ts, r.identity()) for r in out.results] \
        == [(5, ((1, 1),)), (6, ((1, 2),))]
    assert pipeline.k == 0
    late = pipeline.push(tup(1, 3, 4))
    assert late.delay == 2
    assert pipeline.max_delay_seen == 2
    pipeline.finish()
    counts = pipeline.reconcile()
    assert counts["resident"] == 3 and counts["dropped_late"] == 0


def test_set_k_grow_releases_nothing():
    pipeline = JoinPipeline(WindowSpec((5,)), CrossPredicate(), k=1)
    pipeline.push(tup(1, 1, 5))
    out = pipeline.set_k(10)
    assert out.results == [] and out.records == []
    assert pipeline.k == 10


def test_clock_bookkeeping():
    pipeline = JoinPipeline(WindowSpec((10, 10)), CrossPredicate(), k=0)
    assert not pipeline.all_started()
    pipeline.push(tup(1, 1, 7))
    assert pipeline.local_times() == (7, 0)
    assert pipeline.global_time == 7
    assert not pipeline.all_started()
    pipeline.push(tup(2, 2, 4))
    assert pipeline.all_started()
    assert pipeline.local_times() == (7, 4)
    assert pipeline.global_time == 7


def test_lifecycle_errors():
    pipeline = JoinPipeline(WindowSpec((5, 5)), CrossPredicate())
    with pytest.raises(ValueError):
        pipeline.push(tup(3, 1, 1))
    pipeline.finish()
    with pytest.raises(RuntimeError):
        pipeline.push(tup(1, 1, 1))
    with pytest.raises(RuntimeError):
        pipeline.finish()


@pytest.mark.parametrize("m", [2, 3])
def test_full_slack_matches_sorted_truth(m):
    rng = random.Random(m * 61)
    pred = CrossPredicate() if m == 3 else VV
    for _ in range(10):
        trace = feed((rng.randint(1, m), rng.randint(1, 60),
                      {"v": rng.randint(1, 4)}) for _ in range(80))
        windows = WindowSpec(tuple(rng.choice([2, 4, 6]) for _ in range(m)))
        pipeline = JoinPipeline(windows, pred, k=max_needed_k(trace))
        results = run_pipeline(pipeline, trace)
        truth = compute_truth(trace, windows, pred)
        assert {(r.identity(), r.ts) for r in results} \
            == {(i, ts) for i, ts in truth.by_identity.items()}
        assert len(results) == len(truth)
        assert output_in_order_check(results)


@pytest.mark.parametrize("k", [0, 1, 3])
def test_every_pushed_tuple_is_accounted_for(k):
    rng = random.Random(100 + k)
    for m in (2, 3):
        trace = feed((rng.randint(1, m), rng.randint(1, 50))
                     for _ in range(120))
        pipeline = JoinPipeline(WindowSpec((4,) * m), CrossPredicate(), k=k,
                                emit_results=False)
        for e in trace:
            pipeline.push(e)
        pipeline.finish()
        counts = pipeline.reconcile()
        assert counts["pushed"] == 120
        assert counts["buffered"] == 0
