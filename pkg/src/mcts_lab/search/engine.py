"""Pure-Python MCTS engine: the reference semantics mirrored by the compiled core."""
from __future__ import annotations

import math

import numpy as np

from .. import abstraction
from ..mdp import sample_index
from .config import SearchConfig
from .graph import GraphSnapshot, QNode, SearchGraph
from .model import ModelCache


class NoVisitedChild(RuntimeError):
    pass


def ucb_value(q: QNode, parent_visits: int, lam: float, aggregate: bool = True) -> float:
    n, v = (q.group.N, q.group.V) if aggregate else (q.N, q.V)
    if n == 0:
        return math.inf
    if lam == 0.0:
        return v / n
    return v / n + lam * math.sqrt(math.log(parent_visits) / n)


def global_std_exploration(graph: SearchGraph, C: float, fallback: float) -> float:
    return C * graph.sigma(fallback)


class PyEngine:
    """One search (one decision): builds a fresh graph rooted at ``root``."""

    backend = "python"

    def __init__(self, model: ModelCache, config: SearchConfig, rng: np.random.Generator,
                 root_sid: int, horizon: int):
        if horizon < 1 or model.terminal[root_sid]:
            raise ValueError("search needs a non-terminal root with horizon >= 1")
        self.model = model
        self.config = config
        self.rng = rng
        self.graph = SearchGraph(model, root_sid, horizon)
        self.iterations_done = 0
        policy = config.abstraction_policy
        self.ctx = (
            abstraction.AbstractionContext(self.graph, policy, config.recency_K, rng.random)
            if policy.abstracts else None
        )

    def run(self, iterations: int | None = None) -> None:
        for _ in range(self.config.iterations if iterations is None else iterations):
            self.run_iteration()

    def _select(self, s, lam: float) -> QNode:
        if len(s.children) < s.nact:
            return self.graph.add_q(s)
        best, best_val = None, -math.inf
        parent = s.nsum
        for q in s.children:
            val = ucb_value(q, parent, lam)
            if best is None or val > best_val:
                best, best_val = q, val
        return best

    def rollout(self, sid: int, depth: int) -> float:
        m, rand, horizon = self.model, self.rng.random, self.graph.horizon
        g = 0.0
        while not m.terminal[sid] and depth < horizon:
            a = int(rand() * m.nact[sid])
            r, succ, _, cum = m.fetch(sid, a)
            g += r
            sid = succ[sample_index(cum, rand())]
            depth += 1
        return g

    def run_iteration(self) -> None:
        graph, cfg, rand = self.graph, self.config, self.rng.random
        sigma = graph.sigma(cfg.sigma_fallback)
        lam = cfg.exploration_C * sigma
        s = graph.root
        path: list[QNode] = []
        while not s.terminal:
            q = self._select(s, lam)
            path.append(q)
            i = sample_index(q.cum, rand())
            nxt = q.succ[i]
            if nxt is None:
                nxt, new = graph.link(q, i)
                s = nxt
                if new:
                    break
            else:
                s = nxt
        leaf = s
        ret = 0.0 if leaf.terminal else self.rollout(leaf.sid, leaf.depth)
        self._backup(path, leaf, ret)
        if self.ctx is not None:
            self.ctx.sigma = sigma
            for q in reversed(path):
                abstraction.update_q_abstraction(q, self.ctx)
                abstraction.update_state_abstraction(q.parent, self.ctx)
        self.iterations_done += 1

    def _backup(self, path: list[QNode], leaf, ret: float) -> None:
        graph = self.graph
        leaf.visits += 1
        leaf.group.N += 1
        g = ret
        for q in reversed(path):
            g += q.reward
            val = -g if q.parent.player == 1 else g
            if q.N:
                old = q.V / q.N
                graph.q_sum -= old
                graph.q_sumsq -= old * old
            else:
                graph.q_count += 1
            q.N += 1
            q.V += val
            q.V2 += val * val
            new = q.V / q.N
            graph.q_sum += new
            graph.q_sumsq += new * new
            q.group.N += 1
            q.group.V += val
            p = q.parent
            p.visits += 1
            p.nsum += 1
            p.group.N += 1

    def decide(self) -> int:
        best, best_q = None, -math.inf
        for q in self.graph.root.children:
            if q.N == 0:
                continue
            val = q.V / q.N
            if best is None or val > best_q:
                best, best_q = q.action, val
        if best is None:
            raise NoVisitedChild("no root action has been visited")
        return best

    def root_q_values(self) -> list[float | None]:
        root = self.graph.root
        out: list[float | None] = [None] * root.nact
        for q in root.children:
            if q.N:
                out[q.action] = q.V / q.N
        return out

    def snapshot(self) -> GraphSnapshot:
        return self.graph.snapshot()
