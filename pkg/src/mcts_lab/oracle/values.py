"""Finite-horizon backward induction and policy evaluation on layered MDPs.

Values are expressed from the perspective of the player to move at the
state (the only player in single-agent MDPs); in two-player layers a
successor's value is negated when the mover changes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .layered import Key, LayeredMdp

VALUE_TOL = 1e-9


@dataclass
class ValueTables:
    V: dict[Key, float]
    Q: dict[Key, float]

    def optimal_actions(self, mdp: LayeredMdp, d: int, s, tol: float = VALUE_TOL) -> list[int]:
        n = mdp.num_actions(d, s)
        if n == 0:
            return []
        best = self.V[(d, s)]
        return [a for a in range(n) if self.Q[(d, s, a)] >= best - tol]


def _q(mdp: LayeredMdp, V: dict, d: int, s, a: int) -> float:
    sign = -1.0 if mdp.player(d, s) else 1.0
    me = mdp.player(d, s)
    total = sign * mdp.rewards[(d, s, a)]
    for t, p in mdp.transitions[(d, s, a)]:
        v = V[(d + 1, t)]
        total += p * (v if mdp.player(d + 1, t) == me else -v)
    return total


def value_iteration(mdp: LayeredMdp) -> ValueTables:
    V: dict[Key, float] = {}
    Q: dict[Key, float] = {}
    for d in range(mdp.depth, -1, -1):
        for s in mdp.layers[d]:
            n = mdp.num_actions(d, s)
            if mdp.is_terminal(d, s) or n == 0:
                V[(d, s)] = 0.0
                continue
            qs = [_q(mdp, V, d, s, a) for a in range(n)]
            for a, q in enumerate(qs):
                Q[(d, s, a)] = q
            V[(d, s)] = max(qs)
    return ValueTables(V, Q)


def evaluate_policy(mdp: LayeredMdp, policy: Callable[[int, object], int]) -> dict[Key, float]:
    """Exact value of a deterministic policy ``policy(depth, state) -> action``."""
    V: dict[Key, float] = {}
    for d in range(mdp.depth, -1, -1):
        for s in mdp.layers[d]:
            if mdp.is_terminal(d, s) or mdp.num_actions(d, s) == 0:
                V[(d, s)] = 0.0
            else:
                V[(d, s)] = _q(mdp, V, d, s, policy(d, s))
    return V
