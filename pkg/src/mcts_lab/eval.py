"""Evaluation statistics: pairings and relative-improvement scores, abstraction rate, 99% intervals.

Score matrices follow the printed definitions verbatim, including the
``1/(m-1)`` normaliser over sums of ``m`` task terms, so pairings entries may
reach ``m/(m-1)`` in magnitude.
"""
from __future__ import annotations

import csv
import io
import json
import math
import statistics
from dataclasses import dataclass, field
from typing import Sequence

Z99 = 2.33


class EvalError(ValueError):
    pass


class TooFewTasks(EvalError):
    pass


class TooFewAgents(EvalError):
    pass


class TooFewSamples(EvalError):
    pass


class NoEligibleGroups(EvalError):
    pass


@dataclass
class PerfMatrix:
    """Mean performance ``perf[i][k]`` of agent ``i`` on task ``k``."""

    agents: list[str]
    tasks: list[str]
    perf: list[list[float]]

    def __post_init__(self) -> None:
        self.agents = list(self.agents)
        self.tasks = list(self.tasks)
        self.perf = [[float(x) for x in row] for row in self.perf]
        if len(self.perf) != len(self.agents):
            raise EvalError(f"{len(self.perf)} rows for {len(self.agents)} agents")
        for label, row in zip(self.agents, self.perf):
            if len(row) != len(self.tasks):
                raise EvalError(f"row of {label!r} has {len(row)} entries for {len(self.tasks)} tasks")
        if len(set(self.agents)) != len(self.agents):
            raise EvalError("agent labels must be unique")


@dataclass
class ScoreReport:
    kind: str  # "pairings" or "relative"
    agents: list[str]
    matrix: list[list[float]]
    scores: list[float] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["agent", *self.agents])
        for label, row in zip(self.agents, self.matrix):
            w.writerow([label, *(repr(x) for x in row)])
        return buf.getvalue()

    def to_json(self) -> str:
        body = {
            "kind": self.kind,
            "agents": self.agents,
            "scores": [{"agent": a, "score": s} for a, s in zip(self.agents, self.scores)],
        }
        return json.dumps(body, indent=2) + "\n"


def _sign(x: float) -> float:
    return (x > 0) - (x < 0)


def _scores(matrix: list[list[float]]) -> list[float]:
    n = len(matrix)
    if n < 2:
        return [0.0] * n
    return [sum(row[j] for j in range(n) if j != i) / (n - 1) for i, row in enumerate(matrix)]


def _report(perf: PerfMatrix, kind: str, term) -> ScoreReport:
    m = len(perf.tasks)
    if m < 2:
        raise TooFewTasks(f"score matrices need at least 2 tasks, got {m}")
    n = len(perf.agents)
    M = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            total = sum(term(perf.perf[i][k], perf.perf[j][k]) for k in range(m))
            M[i][j] = total / (m - 1)
            M[j][i] = -M[i][j]
    return ScoreReport(kind, list(perf.agents), M, _scores(M))


def pairings_scores(perf: PerfMatrix) -> ScoreReport:
    return _report(perf, "pairings", lambda a, b: _sign(a - b))


def _relative_term(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else (a - b) / scale


def relative_improvement_scores(perf: PerfMatrix) -> ScoreReport:
    return _report(perf, "relative", _relative_term)


SCORERS = {"pairings": pairings_scores, "relative": relative_improvement_scores}


def abstraction_rate(snapshot) -> float:
    """Share of size-one groups among the non-trivial state groups of a search graph.

    Trivial groups are the terminal groups and singletons whose member never
    had its abstraction recomputed.
    """
    updated = {s[0]: s[7] for s in snapshot.states}
    eligible = singletons = 0
    for _, kind, _, terminal, _, members, _, _ in snapshot.groups:
        if kind != "state" or terminal:
            continue
        if len(members) == 1:
            if not updated[members[0]]:
                continue
            singletons += 1
        eligible += 1
    if eligible == 0:
        raise NoEligibleGroups("no non-trivial state group in the graph")
    return singletons / eligible


def confidence_interval(samples: Sequence[float]) -> tuple[float, float]:
    """Mean and the 99% half width ``2.33 * sample std / sqrt(n)``."""
    xs = [float(x) for x in samples]
    if len(xs) < 2:
        raise TooFewSamples(f"need at least 2 samples, got {len(xs)}")
    return statistics.fmean(xs), Z99 * statistics.stdev(xs) / math.sqrt(len(xs))


__all__ = [
    "EvalError", "NoEligibleGroups", "PerfMatrix", "SCORERS", "ScoreReport", "TooFewAgents",
    "TooFewSamples", "TooFewTasks", "Z99", "abstraction_rate", "confidence_interval",
    "pairings_scores", "relative_improvement_scores",
]
