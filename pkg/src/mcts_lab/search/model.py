"""Interned view of a domain for the search engines.

States are numbered in first-seen order; the transition table of each
``(sid, action)`` is fetched from the domain once and reused.  One cache may
live for a whole episode: its contents depend only on the domain, so reuse
never changes search results.
"""
from __future__ import annotations

from itertools import accumulate

from ..mdp import Domain, EnvState


class ModelCache:
    def __init__(self, domain: Domain):
        self.domain = domain
        self.index: dict[EnvState, int] = {}
        self.states: list[EnvState] = []
        self.nact: list[int] = []
        self.terminal: list[bool] = []
        self.player: list[int] = []
        # (sid, a) -> (reward, successor sids, probabilities, cumulative probabilities)
        self.edges: dict[tuple[int, int], tuple[float, tuple, tuple, tuple]] = {}

    def __len__(self) -> int:
        return len(self.states)

    def intern(self, state: EnvState) -> int:
        sid = self.index.get(state)
        if sid is None:
            sid = len(self.states)
            self.index[state] = sid
            self.states.append(state)
            term = self.domain.is_terminal(state)
            self.terminal.append(term)
            self.nact.append(0 if term else self.domain.num_actions(state))
            self.player.append(self.domain.player_to_move(state))
        return sid

    def fetch(self, sid: int, a: int):
        key = (sid, a)
        hit = self.edges.get(key)
        if hit is None:
            state = self.states[sid]
            entries = self.domain.enumerate_transitions(state, a)
            succ = tuple(self.intern(e.successor) for e in entries)
            probs = tuple(e.probability for e in entries)
            hit = (float(self.domain.reward(state, a)), succ, probs, tuple(accumulate(probs)))
            self.edges[key] = hit
        return hit
