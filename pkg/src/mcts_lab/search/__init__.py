"""MCTS over a layered search graph with on-the-go abstractions.

Two engines implement the same semantics: the compiled core
(``mcts_lab._core``) and the pure-Python reference engine.  The compiled core
is used when it is importable unless ``MCTS_LAB_BACKEND=python`` is set.
Given the same model, configuration and generator state both produce the
same graph, the same statistics and the same decisions.
"""
from __future__ import annotations

import os
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..mdp import Domain
from .config import VARIANTS, AbstractionPolicy, ConfigError, SearchConfig, ipa, oga, uct
from .engine import NoVisitedChild, PyEngine, global_std_exploration, ucb_value
from .graph import AbstractNode, GraphSnapshot, QNode, SearchGraph, StateNode
from .model import ModelCache

try:
    from .. import _core
except ImportError:  # extension not built
    _core = None


def available_backends() -> list[str]:
    return ["python"] + (["compiled"] if _core is not None else [])


def default_backend() -> str:
    forced = os.environ.get("MCTS_LAB_BACKEND", "").strip().lower()
    if forced in ("python", "py"):
        return "python"
    if forced in ("compiled", "cython", "core"):
        if _core is None:
            raise RuntimeError("MCTS_LAB_BACKEND requests the compiled core but it is not built")
        return "compiled"
    return "compiled" if _core is not None else "python"


def make_engine(model: ModelCache, config: SearchConfig, rng: np.random.Generator,
                root_sid: int, horizon: int, backend: str | None = None):
    backend = backend or default_backend()
    if backend == "python":
        return PyEngine(model, config, rng, root_sid, horizon)
    if backend == "compiled":
        if _core is None:
            raise RuntimeError("the compiled core is not available")
        return _core.CoreEngine(model, config, rng, root_sid, horizon)
    raise ValueError(f"unknown backend {backend!r}")


def search_rng(seed: int, label: str) -> np.random.Generator:
    """Search stream of an agent: depends on the episode seed and the agent label."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, zlib.crc32(label.encode())])))


def env_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed])))


class Search:
    """Convenience wrapper: plan from a ground state and return an action index."""

    def __init__(self, domain: Domain, config: SearchConfig, model: ModelCache | None = None,
                 backend: str | None = None):
        self.domain = domain
        self.config = config
        self.model = model or ModelCache(domain)
        self.backend = backend or default_backend()
        self.engine = None

    def plan(self, state, rng: np.random.Generator, horizon: int | None = None) -> int:
        h = self.domain.horizon if horizon is None else horizon
        if self.config.planning_horizon is not None:
            h = min(h, self.config.planning_horizon)
        self.engine = make_engine(self.model, self.config, rng, self.model.intern(state), h, self.backend)
        self.engine.run()
        return self.engine.decide()


@dataclass
class EpisodeResult:
    ret: float
    actions: list[int] = field(default_factory=list)
    decision_times: list[float] = field(default_factory=list)
    steps: int = 0


def play_episode(
    domain: Domain,
    agent_config: SearchConfig,
    opponent_config: SearchConfig | None = None,
    seed: int = 0,
    agent_player: int = 0,
    stream_label: str = "agent",
    backend: str | None = None,
    model: ModelCache | None = None,
    on_decision: Callable | None = None,
) -> EpisodeResult:
    """Play one episode with a fresh search per decision.

    In two-player domains the agent moves as ``agent_player`` and the opponent
    plans for the other side; the return is reported from the agent's side.
    ``on_decision(engine, step, state)`` is called after each agent search.
    """
    two = domain.num_players == 2
    if two != (opponent_config is not None):
        raise ConfigError("opponent_config is required for two-player domains and only for them")
    model = model or ModelCache(domain)
    backend = backend or default_backend()
    erng = env_rng(seed)
    agent_rng = search_rng(seed, stream_label)
    opp_rng = search_rng(seed, "opponent") if two else None
    state = domain.initial_state()
    out = EpisodeResult(0.0)
    total = 0.0
    t = 0
    while not domain.is_terminal(state) and t < domain.horizon:
        mine = not two or domain.player_to_move(state) == agent_player
        cfg, rng = (agent_config, agent_rng) if mine else (opponent_config, opp_rng)
        h = domain.horizon - t
        if cfg.planning_horizon is not None:
            h = min(h, cfg.planning_horizon)
        start = time.perf_counter()
        engine = make_engine(model, cfg, rng, model.intern(state), h, backend)
        engine.run()
        a = engine.decide()
        elapsed = time.perf_counter() - start
        if mine:
            out.actions.append(a)
            out.decision_times.append(elapsed)
            if on_decision is not None:
                on_decision(engine, t, state)
        state, r = domain.sample_transition(state, a, erng)
        total += r
        t += 1
    out.ret = -total if two and agent_player == 1 else total
    out.steps = t
    return out


__all__ = [
    "AbstractNode", "AbstractionPolicy", "ConfigError", "EpisodeResult", "GraphSnapshot",
    "ModelCache", "NoVisitedChild", "PyEngine", "QNode", "Search", "SearchConfig", "SearchGraph",
    "StateNode", "VARIANTS", "available_backends", "default_backend", "env_rng",
    "global_std_exploration", "ipa", "make_engine", "oga", "play_episode", "search_rng",
    "ucb_value", "uct",
]
