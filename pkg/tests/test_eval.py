from __future__ import annotations

import csv
import io
import json
import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcts_lab.eval import (
    Z99,
    EvalError,
    NoEligibleGroups,
    PerfMatrix,
    TooFewSamples,
    TooFewTasks,
    abstraction_rate,
    confidence_interval,
    pairings_scores,
    relative_improvement_scores,
)


def _perf(*rows):
    return PerfMatrix([f"a{i}" for i in range(len(rows))], [f"t{k}" for k in range(len(rows[0]))], list(rows))


# -- score matrices ---------------------------------------------------------------------------

@pytest.mark.parametrize("scorer", [pairings_scores, relative_improvement_scores])
def test_identical_rows_score_zero(scorer):
    rep = scorer(_perf((1.0, 2.0, 3.0), (1.0, 2.0, 3.0)))
    assert rep.matrix == [[0.0, 0.0], [0.0, 0.0]]
    assert rep.scores == [0.0, 0.0]


def test_pairings_cancelling_tasks():
    rep = pairings_scores(_perf((1, 2, 3), (2, 1, 3)))
    assert rep.matrix[0][1] == 0.0


def test_pairings_domination_uses_printed_normaliser():
    rep = pairings_scores(_perf((5, 5, 5), (1, 1, 1)))
    assert rep.matrix[0][1] == 1.5
    assert rep.matrix[1][0] == -1.5
    assert rep.scores == [1.5, -1.5]


def test_relative_improvement_example():
    rep = relative_improvement_scores(_perf((2, 4), (1, 4)))
    assert rep.matrix[0][1] == 0.5
    assert rep.matrix[1][0] == -0.5


def test_relative_improvement_zero_over_zero():
    rep = relative_improvement_scores(_perf((0, 1), (0, -1)))
    assert rep.matrix[0][1] == pytest.approx(2.0)


def test_three_agent_scores():
    rep = pairings_scores(_perf((3, 3), (2, 2), (1, 1)))
    # M[0] = (0, 2, 2), M[1] = (-2, 0, 2), M[2] = (-2, -2, 0)
    assert rep.scores == pytest.approx([2.0, 0.0, -2.0])


@pytest.mark.parametrize("scorer", [pairings_scores, relative_improvement_scores])
def test_single_task_rejected(scorer):
    with pytest.raises(TooFewTasks):
        scorer(_perf((1.0,), (2.0,)))


def test_ragged_matrix_rejected():
    with pytest.raises(EvalError):
        PerfMatrix(["a", "b"], ["t", "u"], [[1, 2], [3]])
    with pytest.raises(EvalError):
        PerfMatrix(["a", "a"], ["t", "u"], [[1, 2], [3, 4]])


matrices = st.integers(2, 6).flatmap(lambda n: st.integers(2, 6).flatmap(
    lambda m: st.lists(st.lists(st.floats(-100, 100, allow_nan=False), min_size=m, max_size=m),
                       min_size=n, max_size=n)))


@settings(max_examples=300, deadline=None)
@given(matrices)
def test_score_invariants(rows):
    perf = _perf(*rows)
    m = len(perf.tasks)
    for scorer in (pairings_scores, relative_improvement_scores):
        rep = scorer(perf)
        n = len(rows)
        for i in range(n):
            assert rep.matrix[i][i] == 0.0
            for j in range(n):
                assert rep.matrix[i][j] == -rep.matrix[j][i]
        assert abs(sum(rep.scores)) <= 1e-9
    pair = pairings_scores(perf)
    assert all(abs(x) <= m / (m - 1) + 1e-12 for row in pair.matrix for x in row)


def test_pairings_monotone_invariance():
    rng = np.random.default_rng(3)
    for _ in range(200):
        rows = rng.normal(size=(4, 5)).tolist()
        base = pairings_scores(_perf(*rows))
        transformed = [[math.exp(3 * x) - 7 for x in row] for row in rows]
        assert pairings_scores(_perf(*transformed)).matrix == base.matrix


# -- serialisation ----------------------------------------------------------------------------

def test_csv_and_json_round_trip():
    rep = pairings_scores(PerfMatrix(["uct", "oga"], ["t1", "t2", "t3"], [[1, 2, 3], [0, 2, 4]]))
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["agent", "uct", "oga"]
    assert [r[0] for r in rows[1:]] == ["uct", "oga"]
    assert [[float(x) for x in r[1:]] for r in rows[1:]] == rep.matrix
    body = json.loads(rep.to_json())
    assert body["kind"] == "pairings"
    assert [s["agent"] for s in body["scores"]] == ["uct", "oga"]
    assert [s["score"] for s in body["scores"]] == rep.scores


# -- abstraction rate -------------------------------------------------------------------------

def _snapshot(groups, updated):
    states = [(sid, 0, b"", 1, 0, 0, 0, up, False) for sid, up in updated.items()]
    return SimpleNamespace(states=states, groups=groups)


def test_abstraction_rate_all_singletons():
    snap = _snapshot([(0, "state", 1, False, 1, (1,), 1, 0.0), (1, "state", 1, False, 2, (2,), 1, 0.0)],
                     {1: True, 2: True})
    assert abstraction_rate(snap) == 1.0


def test_abstraction_rate_half():
    groups = [
        (0, "state", 1, False, 1, (1, 2), 2, 0.0),
        (1, "state", 1, False, 3, (3,), 1, 0.0),
        (2, "state", 2, True, 4, (4, 5), 2, 0.0),  # terminal group: trivial
        (3, "state", 2, False, 6, (6,), 1, 0.0),  # never updated: trivial
        (4, "q", 0, False, 7, (7,), 1, 0.0),
    ]
    snap = _snapshot(groups, {1: True, 2: True, 3: True, 4: False, 5: False, 6: False})
    assert abstraction_rate(snap) == 0.5


def test_abstraction_rate_needs_eligible_groups():
    snap = _snapshot([(0, "state", 0, False, 0, (0,), 1, 0.0)], {0: False})
    with pytest.raises(NoEligibleGroups):
        abstraction_rate(snap)


# -- confidence intervals -----------------------------------------------------------------------

def test_confidence_interval_examples():
    assert confidence_interval([3.0, 3.0, 3.0]) == (3.0, 0.0)
    mean, half = confidence_interval([0.0, 2.0])
    assert mean == 1.0 and half == pytest.approx(2.33, abs=1e-12)
    assert Z99 == 2.33


def test_confidence_interval_shrinks_with_root_n():
    base = np.random.default_rng(0).normal(size=100)
    _, h100 = confidence_interval(base)
    _, h400 = confidence_interval(np.tile(base, 4))
    # four copies keep the sample std close to the original, so the width halves
    ratio = h100 / h400
    assert ratio == pytest.approx(2.0 * math.sqrt(399 / 396), rel=1e-12)


def test_confidence_interval_needs_two_samples():
    with pytest.raises(TooFewSamples):
        confidence_interval([1.0])
