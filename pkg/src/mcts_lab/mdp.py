"""Finite-horizon MDP interface shared by every domain, the search engines and the oracles.

States are :class:`EnvState` values whose identity is a canonical byte
encoding.  Actions are positional: action ``i`` names the ``i``-th entry of
``legal_actions(state)``.  Rewards are attached to ``(state, action)`` and, in
two-player domains, are reported from player 0's perspective.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import accumulate
from typing import Any, NamedTuple, Sequence

import numpy as np

PROB_TOL = 1e-9
SAMPLING_CACHE_SIZE = 1 << 16


class MdpError(Exception):
    """Base class for model errors."""


class IllegalAction(MdpError):
    pass


class InvalidSpec(MdpError):
    pass


class UnknownDomain(MdpError):
    pass


@dataclass(frozen=True)
class MdpDescriptor:
    domain_name: str
    horizon: int
    discount: float = 1.0
    num_players: int = 1

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise InvalidSpec(f"horizon must be >= 1, got {self.horizon}")
        if not 0.0 < self.discount <= 1.0:
            raise InvalidSpec(f"discount must lie in (0, 1], got {self.discount}")
        if self.num_players not in (1, 2):
            raise InvalidSpec(f"num_players must be 1 or 2, got {self.num_players}")


class EnvState:
    """Hashable ground state.

    Equality and hashing use only ``payload`` (the canonical encoding); the
    two other fields are derived data cached for speed.
    """

    __slots__ = ("payload", "player_to_move", "is_terminal", "_hash")

    def __init__(self, payload: bytes, player_to_move: int = 0, is_terminal: bool = False):
        self.payload = bytes(payload)
        self.player_to_move = player_to_move
        self.is_terminal = is_terminal
        self._hash = hash(self.payload)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EnvState):
            return NotImplemented
        return self.payload == other.payload

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        flag = " terminal" if self.is_terminal else ""
        return f"EnvState({self.payload.hex()}, p{self.player_to_move}{flag})"

    def __reduce__(self):
        return (EnvState, (self.payload, self.player_to_move, self.is_terminal))


class TransitionEntry(NamedTuple):
    successor: EnvState
    probability: float


def normalize_entries(entries: Sequence[tuple[EnvState, float]]) -> list[TransitionEntry]:
    """Merge duplicate successors and drop zero-probability outcomes, keeping first-seen order."""
    merged: dict[EnvState, float] = {}
    for succ, p in entries:
        if p < 0.0:
            raise InvalidSpec(f"negative probability {p}")
        if p == 0.0:
            continue
        merged[succ] = merged.get(succ, 0.0) + p
    total = math.fsum(merged.values())
    if abs(total - 1.0) > PROB_TOL:
        raise InvalidSpec(f"transition probabilities sum to {total!r}")
    return [TransitionEntry(s, p) for s, p in merged.items()]


def sample_index(cumulative: Sequence[float], u: float) -> int:
    """Inverse-CDF lookup shared by every sampler (and mirrored by the compiled core)."""
    for i, c in enumerate(cumulative):
        if u < c:
            return i
    return len(cumulative) - 1


class Domain:
    """A bound finite MDP.

    Subclasses implement :meth:`initial_state`, :meth:`legal_actions`,
    :meth:`reward` and :meth:`enumerate_transitions`.  Domain objects are
    immutable after construction.
    """

    descriptor: MdpDescriptor

    @property
    def name(self) -> str:
        return self.descriptor.domain_name

    @property
    def horizon(self) -> int:
        return self.descriptor.horizon

    @property
    def num_players(self) -> int:
        return self.descriptor.num_players

    def initial_state(self) -> EnvState:
        raise NotImplementedError

    def legal_actions(self, state: EnvState) -> list[int]:
        raise NotImplementedError

    def num_actions(self, state: EnvState) -> int:
        return len(self.legal_actions(state))

    def action_label(self, state: EnvState, action: int) -> Any:
        return action

    def state_label(self, state: EnvState) -> str:
        """Short human-readable name of a state (used in reports)."""
        return state.payload.hex()

    def is_terminal(self, state: EnvState) -> bool:
        return state.is_terminal

    def player_to_move(self, state: EnvState) -> int:
        return state.player_to_move

    def reward(self, state: EnvState, action: int) -> float:
        raise NotImplementedError

    def _transitions(self, state: EnvState, action: int) -> Sequence[tuple[EnvState, float]]:
        raise NotImplementedError

    def check_action(self, state: EnvState, action: int) -> None:
        n = self.num_actions(state)
        if not (0 <= action < n):
            raise IllegalAction(f"action {action} not legal in {state!r} ({n} legal actions)")

    def enumerate_transitions(self, state: EnvState, action: int) -> list[TransitionEntry]:
        self.check_action(state, action)
        return normalize_entries(self._transitions(state, action))

    def _sampling_table(self, state: EnvState, action: int):
        # memo of (successors, cumulative probabilities, reward); bounded, results unchanged
        cache = self.__dict__.setdefault("_sampling_cache", {})
        key = (state, action)
        hit = cache.get(key)
        if hit is None:
            entries = self.enumerate_transitions(state, action)
            hit = (
                [e.successor for e in entries],
                list(accumulate(e.probability for e in entries)),
                self.reward(state, action),
            )
            if len(cache) >= SAMPLING_CACHE_SIZE:
                cache.clear()
            cache[key] = hit
        return hit

    def sample_transition(
        self, state: EnvState, action: int, rng: np.random.Generator
    ) -> tuple[EnvState, float]:
        self.check_action(state, action)
        succ, cumulative, reward = self._sampling_table(state, action)
        return succ[sample_index(cumulative, rng.random())], reward
