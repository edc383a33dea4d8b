"""Audit the groups of a finished search against exact values.

A search graph rooted at ``root`` with horizon ``h`` lives inside
``unroll(domain, root, h)``: a node at depth ``d`` is the layer-``d`` state
with the same payload.  A group is sound when all its members share one
optimal value (V* for state groups, Q* for pair groups).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..mdp import EnvState
from .values import ValueTables

KeyFn = Callable[[int, bytes], object]


def unrolled_key(depth: int, payload: bytes) -> tuple:
    """Key of a search node in an MDP produced by :func:`unroll`."""
    return (depth, EnvState(payload))


@dataclass
class SoundnessReport:
    state_spread: float
    q_spread: float
    state_groups: int  # non-trivial groups inspected
    q_groups: int

    @property
    def sound(self) -> bool:
        return self.state_spread <= 1e-9 and self.q_spread <= 1e-9


def audit_snapshot(snapshot, values: ValueTables, key_of: KeyFn = unrolled_key) -> SoundnessReport:
    """Largest value spread inside any non-trivial group of ``snapshot``."""
    state_key = {}
    for node_id, depth, payload, *_ in snapshot.states:
        state_key[node_id] = key_of(depth, payload)
    q_key = {}
    for q in snapshot.qnodes:
        d, s = state_key[q[1]]
        q_key[q[0]] = (d, s, q[2])
    spreads = {"state": 0.0, "qpair": 0.0}
    counts = {"state": 0, "qpair": 0}
    for _, kind, _, _, _, members, _, _ in snapshot.groups:
        if len(members) < 2:
            continue
        if kind == "state":
            vals = [values.V[state_key[m]] for m in members]
        else:
            vals = [values.Q[q_key[m]] for m in members]
        counts[kind] += 1
        spreads[kind] = max(spreads[kind], max(vals) - min(vals))
    return SoundnessReport(spreads["state"], spreads["qpair"], counts["state"], counts["qpair"])
