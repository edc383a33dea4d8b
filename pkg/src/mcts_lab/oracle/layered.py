"""Explicit layered MDPs: the substrate of every exact oracle.

A :class:`LayeredMdp` lists the states of each depth and, for every
non-terminal ``(depth, state)``, its actions with an explicit distribution
into the next layer.  It can be parsed from / written to a small line format::

    layer 0
    state s0
    edge s0 0 a:0.5 b:0.5 r=-1
    layer 1
    state a terminal
    state b player=1 terminal

``edge`` lines belong to the most recent ``layer`` line; action indices of a
state must be ``0..n-1``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from ..mdp import Domain, EnvState, InvalidSpec, PROB_TOL

Key = tuple  # (depth, state) or (depth, state, action)


class LayeredFormatError(InvalidSpec):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass
class LayeredMdp:
    layers: list[list[Hashable]]
    transitions: dict[Key, list[tuple[Hashable, float]]] = field(default_factory=dict)
    rewards: dict[Key, float] = field(default_factory=dict)
    terminal: set[Key] = field(default_factory=set)
    players: dict[Key, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._nact: dict[Key, int] = {}
        for (d, s, a) in self.transitions:
            self._nact[(d, s)] = max(self._nact.get((d, s), 0), a + 1)

    @property
    def depth(self) -> int:
        """Index of the final layer."""
        return len(self.layers) - 1

    def num_actions(self, d: int, s) -> int:
        return self._nact.get((d, s), 0)

    def is_terminal(self, d: int, s) -> bool:
        return (d, s) in self.terminal or d == self.depth

    def player(self, d: int, s) -> int:
        return self.players.get((d, s), 0)

    def num_states(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def validate(self) -> None:
        members = [set(layer) for layer in self.layers]
        for d, layer in enumerate(self.layers):
            if len(members[d]) != len(layer):
                raise InvalidSpec(f"duplicate state in layer {d}")
            for s in layer:
                n = self.num_actions(d, s)
                if self.is_terminal(d, s):
                    if n:
                        raise InvalidSpec(f"terminal state {s!r} at depth {d} has actions")
                    continue
                if n == 0:
                    raise InvalidSpec(f"non-terminal state {s!r} at depth {d} has no actions")
                for a in range(n):
                    dist = self.transitions.get((d, s, a))
                    if dist is None:
                        raise InvalidSpec(f"missing action {a} of {s!r} at depth {d}")
                    if (d, s, a) not in self.rewards:
                        raise InvalidSpec(f"missing reward for {(d, s, a)!r}")
                    succs = [t for t, _ in dist]
                    if len(set(succs)) != len(succs):
                        raise InvalidSpec(f"duplicate successor in {(d, s, a)!r}")
                    if any(t not in members[d + 1] for t in succs):
                        raise InvalidSpec(f"{(d, s, a)!r} leaves layer {d + 1}")
                    total = math.fsum(p for _, p in dist)
                    if abs(total - 1.0) > PROB_TOL:
                        raise InvalidSpec(f"{(d, s, a)!r} probabilities sum to {total}")
        for (d, s, a) in self.transitions:
            if s not in members[d]:
                raise InvalidSpec(f"edge from unknown state {s!r} at depth {d}")

    def state_keys(self) -> Iterable[Key]:
        for d, layer in enumerate(self.layers):
            for s in layer:
                yield (d, s)

    def pair_keys(self) -> Iterable[Key]:
        for d, s in self.state_keys():
            for a in range(self.num_actions(d, s)):
                yield (d, s, a)


def parse_layered(text: str) -> LayeredMdp:
    layers: list[list[str]] = []
    transitions: dict[Key, list[tuple[str, float]]] = {}
    rewards: dict[Key, float] = {}
    terminal: set[Key] = set()
    players: dict[Key, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        if kind == "layer":
            if len(tok) != 2 or not tok[1].isdigit() or int(tok[1]) != len(layers):
                raise LayeredFormatError(lineno, f"expected 'layer {len(layers)}'")
            layers.append([])
        elif not layers:
            raise LayeredFormatError(lineno, "content before the first 'layer' line")
        elif kind == "state":
            if len(tok) < 2:
                raise LayeredFormatError(lineno, "state needs an id")
            d, sid = len(layers) - 1, tok[1]
            layers[-1].append(sid)
            for flag in tok[2:]:
                if flag == "terminal":
                    terminal.add((d, sid))
                elif flag.startswith("player="):
                    players[(d, sid)] = int(flag[7:])
                else:
                    raise LayeredFormatError(lineno, f"unknown state flag {flag!r}")
        elif kind == "edge":
            if len(tok) < 5 or not tok[-1].startswith("r="):
                raise LayeredFormatError(lineno, "edge <state> <action> <succ>:<prob>... r=<reward>")
            d = len(layers) - 1
            try:
                a = int(tok[2])
                dist = []
                for item in tok[3:-1]:
                    succ, p = item.rsplit(":", 1)
                    dist.append((succ, float(p)))
                rewards[(d, tok[1], a)] = float(tok[-1][2:])
            except ValueError as exc:
                raise LayeredFormatError(lineno, str(exc)) from None
            transitions[(d, tok[1], a)] = dist
        else:
            raise LayeredFormatError(lineno, f"unknown directive {kind!r}")
    mdp = LayeredMdp(layers, transitions, rewards, terminal, players)
    mdp.validate()
    return mdp


def dump_layered(mdp: LayeredMdp) -> str:
    """Serialise; state keys are written with ``str`` so they must be token-safe."""
    out = []
    for d, layer in enumerate(mdp.layers):
        out.append(f"layer {d}")
        for s in layer:
            flags = ""
            if mdp.player(d, s):
                flags += f" player={mdp.player(d, s)}"
            if (d, s) in mdp.terminal:
                flags += " terminal"
            out.append(f"state {s}{flags}")
        for s in layer:
            for a in range(mdp.num_actions(d, s)):
                dist = " ".join(f"{t}:{p!r}" for t, p in mdp.transitions[(d, s, a)])
                out.append(f"edge {s} {a} {dist} r={mdp.rewards[(d, s, a)]!r}")
    return "\n".join(out) + "\n"


def unroll(domain: Domain, root: EnvState | None = None, horizon: int | None = None) -> LayeredMdp:
    """Breadth-first unrolling of the states reachable from ``root`` within ``horizon`` steps.

    States at depth ``horizon`` (and domain-terminal states) are terminal.
    """
    root = domain.initial_state() if root is None else root
    horizon = domain.horizon if horizon is None else horizon
    layers: list[list[EnvState]] = [[root]]
    transitions: dict[Key, list] = {}
    rewards: dict[Key, float] = {}
    terminal: set[Key] = set()
    players: dict[Key, int] = {}
    for d in range(horizon + 1):
        nxt: dict[EnvState, None] = {}
        for s in layers[d]:
            if domain.player_to_move(s):
                players[(d, s)] = domain.player_to_move(s)
            if d == horizon or domain.is_terminal(s):
                terminal.add((d, s))
                continue
            for a in range(domain.num_actions(s)):
                dist = [(e.successor, e.probability) for e in domain.enumerate_transitions(s, a)]
                transitions[(d, s, a)] = dist
                rewards[(d, s, a)] = domain.reward(s, a)
                for t, _ in dist:
                    nxt[t] = None
        if d < horizon:
            layers.append(list(nxt))
    return LayeredMdp(layers, transitions, rewards, terminal, players)


def reachable_layers(mdp: LayeredMdp) -> list[set]:
    """States of each layer reachable from layer 0 (useful after hand edits)."""
    seen = [set() for _ in mdp.layers]
    queue = deque((0, s) for s in mdp.layers[0])
    seen[0] = set(mdp.layers[0])
    while queue:
        d, s = queue.popleft()
        for a in range(mdp.num_actions(d, s)):
            for t, _ in mdp.transitions[(d, s, a)]:
                if t not in seen[d + 1]:
                    seen[d + 1].add(t)
                    queue.append((d + 1, t))
    return seen
