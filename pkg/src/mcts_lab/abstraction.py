"""On-the-go state and state-action-pair abstractions over a live search graph.

Q nodes are grouped when their rewards and abstract transition distributions
match (within ``eps_a`` / ``eps_t``, optionally ignoring unlikely successors
via ``alpha``).  State nodes are grouped when every kept action of one has an
equivalent action in the other, in both directions; which actions are kept is
the pruning set J of the variant (all for OGA, J_UCB for IPA, CONF/TOPN for the
alternative pruners).  Each group tests join candidates against a single
representative; among several matching groups the largest wins and ties go to
the lowest creation id.

Updates are recency-gated: a node is only reconsidered on every K-th call.
"""
from __future__ import annotations

import math
from statistics import NormalDist
from typing import Callable

from .search.config import AbstractionPolicy
from .search.graph import AbstractNode, QNode, SearchGraph, StateNode

EQ_TOL = 1e-9

Draw = Callable[[], float]


class NotFullyExpanded(ValueError):
    pass


def aggregate_stats(group: AbstractNode) -> tuple[int, float]:
    return group.N, group.V


# -- pair rule -------------------------------------------------------------------

def transition_F(q1: QNode, q2: QNode, alpha: float = 0.0) -> float:
    """Sum over abstract successor classes of the absolute difference in probability mass."""
    mass: dict[int, float] = {}
    for q, sign in ((q1, 1.0), (q2, -1.0)):
        threshold = alpha * max(q.probs)
        for node, p in zip(q.succ, q.probs):
            if p < threshold:
                continue
            key = node.group.creation_id
            mass[key] = mass.get(key, 0.0) + sign * p
    total = 0.0  # plain left-to-right sum, matched by the compiled core
    for v in mass.values():
        total += abs(v)
    return total


def q_pair_equivalent(q1: QNode, q2: QNode, policy: AbstractionPolicy) -> bool:
    if not (q1.fully_expanded and q2.fully_expanded):
        raise NotFullyExpanded("both Q nodes must be fully expanded")
    if q1 is q2:
        return True
    if abs(q1.reward - q2.reward) > policy.eps_a + EQ_TOL:
        return False
    return transition_F(q1, q2, policy.alpha) <= policy.eps_t + EQ_TOL


# -- pruning sets ------------------------------------------------------------------

def _require_expanded(s: StateNode) -> None:
    if not s.fully_expanded or any(c.N == 0 for c in s.children):
        raise NotFullyExpanded(f"{s!r} is not fully expanded")


def compute_J_ucb(s: StateNode, lambda_p: float, sigma: float = 1.0, scaled: bool = True) -> tuple[int, ...]:
    """Actions whose UCB (exploration constant ``lambda_p`` or ``lambda_p * sigma``) reaches max Q."""
    _require_expanded(s)
    if math.isinf(lambda_p):
        return tuple(range(s.nact))
    lam = lambda_p * sigma if scaled else lambda_p
    qs = [c.V / c.N for c in s.children]
    qmax = max(qs)
    log_p = math.log(s.nsum)
    return tuple(
        a for a, c in enumerate(s.children) if qs[a] + lam * math.sqrt(log_p / c.N) >= qmax
    )


def conf_z(p_c: float) -> float:
    return NormalDist().inv_cdf((1.0 + p_c) / 2.0)


def conf_prune(s: StateNode, p_c: float, z: float | None = None) -> tuple[int, ...]:
    """Keep actions whose upper confidence bound reaches the best lower bound."""
    _require_expanded(s)
    z = conf_z(p_c) if z is None else z
    lo, hi = [], []
    for c in s.children:
        if c.N < 2:
            lo.append(-math.inf)
            hi.append(math.inf)
            continue
        mean = c.V / c.N
        var = max(0.0, (c.V2 - c.V * mean) / (c.N - 1))
        half = z * math.sqrt(var) / math.sqrt(c.N)
        lo.append(mean - half)
        hi.append(mean + half)
    best_lo = max(lo)
    return tuple(a for a in range(s.nact) if hi[a] >= best_lo)


def topn_prune(s: StateNode, n_matches: int, n_min: int) -> tuple[int, ...]:
    _require_expanded(s)
    if s.visits < n_min or n_matches >= s.nact:
        return tuple(range(s.nact))
    order = sorted(range(s.nact), key=lambda a: (-(s.children[a].V / s.children[a].N), a))
    return tuple(sorted(order[:n_matches]))


def compute_J(s: StateNode, policy: AbstractionPolicy, sigma: float, z: float | None = None) -> tuple[int, ...]:
    v = policy.variant
    if v == "IPA":
        return compute_J_ucb(s, policy.lambda_p, sigma, policy.lambda_p_scaled)
    if v == "CONF":
        return conf_prune(s, policy.p_c, z)
    if v == "TOPN":
        return topn_prune(s, policy.n_matches, policy.n_min)
    return tuple(range(s.nact))


def stored_J(s: StateNode) -> tuple[int, ...]:
    """The last computed J of ``s``; the full action set before the first computation."""
    return s.J if s.updated else tuple(range(s.nact))


# -- state rule ------------------------------------------------------------------

def states_similar(s1: StateNode, s2: StateNode, J1, J2) -> bool:
    if s1 is s2:
        return True
    g2 = {c.group.creation_id for c in s2.children}
    if any(s1.children[a].group.creation_id not in g2 for a in J1):
        return False
    g1 = {c.group.creation_id for c in s1.children}
    return all(s2.children[a].group.creation_id in g1 for a in J2)


# -- moving nodes between groups ---------------------------------------------------

def _stats(node) -> tuple[int, float]:
    return (node.N, node.V) if isinstance(node, QNode) else (node.visits, 0.0)


def move_node(graph: SearchGraph, node, target: AbstractNode | None, draw: Draw) -> AbstractNode:
    """Move ``node`` into ``target`` (a fresh singleton when ``None``)."""
    g = node.group
    n, v = _stats(node)
    del g.members[node]
    g.N -= n
    g.V -= v
    if not g.members:
        graph.drop_group(g)
    elif g.rep is node:
        members = list(g.members)
        g.rep = members[int(draw() * len(members))]
    if target is None:
        target = graph.new_group(g.kind, g.depth)
        target.rep = node
    target.members[node] = None
    target.N += n
    target.V += v
    node.group = target
    return target


# -- recency-gated updates -----------------------------------------------------------

class AbstractionContext:
    """Everything an update needs besides the node: graph, policy, K, rng and the iteration's sigma."""

    __slots__ = ("graph", "policy", "K", "draw", "sigma", "z")

    def __init__(self, graph: SearchGraph, policy: AbstractionPolicy, K: int, draw: Draw, sigma: float = 1.0):
        self.graph = graph
        self.policy = policy
        self.K = K
        self.draw = draw
        self.sigma = sigma
        self.z = conf_z(policy.p_c) if policy.variant == "CONF" else None


def _gate(node, ctx: AbstractionContext, force: bool) -> bool:
    if force:
        return True
    node.recency += 1
    if node.recency < ctx.K:
        return False
    node.recency = 0
    return True


def update_q_abstraction(q: QNode, ctx: AbstractionContext, force: bool = False) -> bool:
    if not _gate(q, ctx, force) or not q.fully_expanded:
        return False
    policy = ctx.policy
    g = q.group
    if g.rep is not q and g.rep.fully_expanded and q_pair_equivalent(q, g.rep, policy):
        return False
    target = None
    for h in ctx.graph.q_groups[g.depth].values():
        if target is not None and h.size <= target.size:
            continue
        r = h.rep
        if r is q or (r.fully_expanded and q_pair_equivalent(q, r, policy)):
            target = h
    if target is g or (target is None and g.size == 1):
        return False
    move_node(ctx.graph, q, target, ctx.draw)
    update_state_abstraction(q.parent, ctx, force=policy.propagate_bypasses_recency)
    return True


def update_state_abstraction(s: StateNode, ctx: AbstractionContext, force: bool = False) -> bool:
    if s.terminal or not _gate(s, ctx, force):
        return False
    policy = ctx.policy
    if policy.variant == "RSTATE":
        s.updated = True
        return rstate_update(s, ctx)
    if not s.fully_expanded:
        return False
    old_J = stored_J(s)
    new_J = compute_J(s, policy, ctx.sigma, ctx.z)
    s.J = new_J
    s.updated = True
    g = s.group
    if g.rep is not s and g.rep.fully_expanded and states_similar(s, g.rep, new_J, stored_J(g.rep)):
        return False
    target = None
    for h in ctx.graph.state_groups[s.depth].values():
        if h.terminal or (target is not None and h.size <= target.size):
            continue
        r = h.rep
        if r is s:
            ok = states_similar(s, s, new_J, old_J)
        else:
            ok = r.fully_expanded and states_similar(s, r, new_J, stored_J(r))
        if ok:
            target = h
    if target is g or (target is None and g.size == 1):
        return False
    move_node(ctx.graph, s, target, ctx.draw)
    _propagate_to_parents(s, ctx)
    return True


def rstate_update(s: StateNode, ctx: AbstractionContext) -> bool:
    """Random state abstraction: a singleton moves w.p. ``p_move`` to a uniformly chosen group."""
    if s.group.size != 1 or s.terminal:
        return False
    if not ctx.draw() < ctx.policy.p_move:
        return False
    groups = [h for h in ctx.graph.state_groups[s.depth].values() if not h.terminal]
    target = groups[int(ctx.draw() * len(groups))]
    if target is s.group:
        return False
    move_node(ctx.graph, s, target, ctx.draw)
    _propagate_to_parents(s, ctx)
    return True


def _propagate_to_parents(s: StateNode, ctx: AbstractionContext) -> None:
    force = ctx.policy.propagate_bypasses_recency
    for q in list(s.parents):
        update_q_abstraction(q, ctx, force=force)
