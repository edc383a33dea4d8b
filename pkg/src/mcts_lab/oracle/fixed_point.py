"""Exact ASAP / IPA abstractions of a layered MDP.

Pairs are grouped when their rewards differ by at most ``eps_a`` and their
transition mass per next-layer state block differs by at most ``eps_t`` in
total (successors below ``alpha`` times the largest probability are ignored,
without renormalising).  States are grouped when every action kept by the
pruning function ``J`` has a matching pair in the other state, in both
directions.  ASAP keeps every action; IPA keeps the optimal ones.

Layer ``d`` only depends on layer ``d + 1``, so a single bottom-up sweep
reaches the fixed point of the alternating construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable

from .layered import Key, LayeredMdp
from .values import ValueTables

TOL = 1e-9

PruneFn = Callable[[int, Hashable], list[int]]


@dataclass
class Partition:
    kind: str  # "state" or "qpair"
    blocks: list[list[Key]]
    _index: dict[Key, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._index = {m: i for i, block in enumerate(self.blocks) for m in block}

    def block_of(self, key: Key) -> int:
        return self._index[key]

    def same_block(self, a: Key, b: Key) -> bool:
        return self._index[a] == self._index[b]

    def blocks_at(self, depth: int) -> list[list[Key]]:
        return [b for b in self.blocks if b[0][0] == depth]

    def nontrivial(self) -> list[list[Key]]:
        return [b for b in self.blocks if len(b) > 1]


def pair_signature(mdp: LayeredMdp, key: Key, state_block: dict[Key, int], alpha: float) -> dict[int, float]:
    d, s, a = key
    dist = mdp.transitions[key]
    threshold = alpha * max(p for _, p in dist)
    acc: dict[int, float] = {}
    for t, p in dist:
        if p >= threshold:
            b = state_block[(d + 1, t)]
            acc[b] = acc.get(b, 0.0) + p
    return acc


def transition_distance(x: dict[int, float], y: dict[int, float]) -> float:
    return math.fsum(abs(x.get(k, 0.0) - y.get(k, 0.0)) for k in x.keys() | y.keys())


def p_asap_fixed_point(
    mdp: LayeredMdp, prune: PruneFn, eps_a: float = 0.0, eps_t: float = 0.0, alpha: float = 0.0,
) -> tuple[Partition, Partition]:
    state_blocks: list[list[Key]] = []
    pair_blocks: list[list[Key]] = []
    state_block: dict[Key, int] = {}
    pair_block: dict[Key, int] = {}
    for d in range(mdp.depth, -1, -1):
        reps: list[tuple[int, float, dict]] = []
        for s in mdp.layers[d]:
            for a in range(mdp.num_actions(d, s)):
                key = (d, s, a)
                r = mdp.rewards[key]
                sig = pair_signature(mdp, key, state_block, alpha)
                for b, r0, sig0 in reps:
                    if abs(r - r0) <= eps_a + TOL and transition_distance(sig, sig0) <= eps_t + TOL:
                        pair_blocks[b].append(key)
                        pair_block[key] = b
                        break
                else:
                    pair_block[key] = len(pair_blocks)
                    reps.append((len(pair_blocks), r, sig))
                    pair_blocks.append([key])

        terminal_block = None
        state_reps: list[tuple[int, set, set]] = []
        for s in mdp.layers[d]:
            key = (d, s)
            n = mdp.num_actions(d, s)
            if mdp.is_terminal(d, s) or n == 0:
                if terminal_block is None:
                    terminal_block = len(state_blocks)
                    state_blocks.append([])
                state_blocks[terminal_block].append(key)
                state_block[key] = terminal_block
                continue
            every = {pair_block[(d, s, a)] for a in range(n)}
            kept = {pair_block[(d, s, a)] for a in prune(d, s)}
            for b, every0, kept0 in state_reps:
                if kept <= every0 and kept0 <= every:
                    state_blocks[b].append(key)
                    state_block[key] = b
                    break
            else:
                state_block[key] = len(state_blocks)
                state_reps.append((len(state_blocks), every, kept))
                state_blocks.append([key])
    order = lambda blocks: sorted(blocks, key=lambda b: (b[0][0], _first_position(mdp, b[0])))
    return Partition("state", order(state_blocks)), Partition("qpair", order(pair_blocks))


def _first_position(mdp: LayeredMdp, key: Key) -> tuple[int, int]:
    d, s = key[0], key[1]
    return (mdp.layers[d].index(s), key[2] if len(key) > 2 else -1)


def exact_asap_fixed_point(
    mdp: LayeredMdp, eps_a: float = 0.0, eps_t: float = 0.0, alpha: float = 0.0
) -> tuple[Partition, Partition]:
    return p_asap_fixed_point(mdp, lambda d, s: range(mdp.num_actions(d, s)), eps_a, eps_t, alpha)


def exact_ipa_fixed_point(
    mdp: LayeredMdp, values: ValueTables, eps_a: float = 0.0, eps_t: float = 0.0, alpha: float = 0.0,
) -> tuple[Partition, Partition]:
    return p_asap_fixed_point(
        mdp, lambda d, s: values.optimal_actions(mdp, d, s), eps_a, eps_t, alpha
    )


def value_spread(partition: Partition, values: ValueTables) -> float:
    """Largest V* (state blocks) or Q* (pair blocks) range inside any block."""
    table = values.V if partition.kind == "state" else values.Q
    worst = 0.0
    for block in partition.blocks:
        vals = [table.get(k, 0.0) for k in block]
        worst = max(worst, max(vals) - min(vals))
    return worst
