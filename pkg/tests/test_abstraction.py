from __future__ import annotations

import math

import numpy as np
import pytest

from mcts_lab import abstraction as ab
from mcts_lab.domains import build_domain
from mcts_lab.search import AbstractionPolicy, ModelCache, PyEngine, ipa, oga, uct
from mcts_lab.search.config import SearchConfig
from mcts_lab.search.graph import SearchGraph

from conftest import FIG1_LEFT, check_partition, layered_domain, run_search

CROSSED = """
layer 0
state r
edge r 0 x:0.6 y:0.4 r=0
edge r 1 x:0.4 y:0.6 r=0
edge r 2 x:0.6 y:0.4 r=0.5
layer 1
state x
state y
edge x 0 t:1 r=0
edge y 0 t:1 r=1
layer 2
state t terminal
"""

# two deterministic actions with equal rewards into the same successor
CHAIN2 = """
layer 0
state r
edge r 0 x:1 r=1
edge r 1 x:1 r=1
layer 1
state x
edge x 0 t:1 r=0
layer 2
state t terminal
"""

THREE = """
layer 0
state r
edge r 0 a:1 r=0
edge r 1 b:1 r=0
edge r 2 c:1 r=0
layer 1
state a terminal
state b terminal
state c terminal
"""


def _graph(text: str):
    dom = layered_domain(text)
    model = ModelCache(dom)
    return dom, model, SearchGraph(model, model.intern(dom.initial_state()), dom.horizon)


def _expand(graph, s):
    """Create every child of ``s`` and link every successor."""
    while len(s.children) < s.nact:
        graph.add_q(s)
    for q in s.children:
        for i in range(len(q.succ)):
            if q.succ[i] is None:
                graph.link(q, i)
    return s


def _set_stats(s, stats):
    for q, (n, v) in zip(s.children, stats):
        q.N, q.V = n, float(v)
        q.group.N, q.group.V = n, float(v)
    s.nsum = s.visits = sum(n for n, _ in stats)


def _ctx(graph, policy=None, K=3, seed=0, sigma=1.0):
    return ab.AbstractionContext(graph, policy or AbstractionPolicy(), K, np.random.default_rng(seed).random, sigma)


# -- pair rule ---------------------------------------------------------------------

def test_transition_distance_example():
    _, _, g = _graph(CROSSED)
    q0, q1, q2 = _expand(g, g.root).children
    assert ab.transition_F(q0, q1) == pytest.approx(0.4)
    assert ab.q_pair_equivalent(q0, q1, AbstractionPolicy(eps_t=0.4))
    assert not ab.q_pair_equivalent(q0, q1, AbstractionPolicy(eps_t=0.39))


def test_pair_rule_rewards():
    _, _, g = _graph(CROSSED)
    q0, _, q2 = _expand(g, g.root).children
    assert ab.transition_F(q0, q2) == 0.0
    assert not ab.q_pair_equivalent(q0, q2, AbstractionPolicy())
    assert ab.q_pair_equivalent(q0, q2, AbstractionPolicy(eps_a=0.5))
    assert ab.q_pair_equivalent(q0, q0, AbstractionPolicy())


def test_alpha_drops_unlikely_successors_without_renormalising():
    _, _, g = _graph(CROSSED)
    q0, q1, _ = _expand(g, g.root).children
    assert ab.transition_F(q0, q1, alpha=0.0) == ab.transition_F(q0, q1)
    # 0.4 < 0.7 * 0.6, so each side keeps only its 0.6 successor
    assert ab.transition_F(q0, q1, alpha=0.7) == pytest.approx(1.2)


def test_pair_rule_needs_full_expansion():
    _, _, g = _graph(CROSSED)
    q0 = g.add_q(g.root)
    q1 = g.add_q(g.root)
    g.link(q0, 0)
    with pytest.raises(ab.NotFullyExpanded):
        ab.q_pair_equivalent(q0, q1, AbstractionPolicy())


# -- recency gate and Q updates -------------------------------------------------------

def test_recency_gate_k3():
    _, _, g = _graph(CHAIN2)
    q0, q1 = _expand(g, g.root).children
    ctx = _ctx(g)
    assert not ab.update_q_abstraction(q1, ctx)
    assert not ab.update_q_abstraction(q1, ctx)
    assert q1.recency == 2 and q1.group.size == 1
    assert ab.update_q_abstraction(q1, ctx)
    assert q1.recency == 0
    assert q1.group is q0.group and q0.group.size == 2


def test_chain_pairs_grouped_after_recency():
    _, _, g = _graph(CHAIN2)
    q0, q1 = _expand(g, g.root).children
    ctx = _ctx(g)
    for _ in range(3):
        ab.update_q_abstraction(q0, ctx)
        ab.update_q_abstraction(q1, ctx)
    assert q0.group is q1.group and q0.group.size == 2


def test_unexpanded_q_stays_singleton():
    _, _, g = _graph(CROSSED)
    q0 = g.add_q(g.root)
    g.link(q0, 0)
    ctx = _ctx(g, AbstractionPolicy(eps_a=math.inf, eps_t=2.0))
    for _ in range(30):
        assert not ab.update_q_abstraction(q0, ctx)
    assert q0.group.size == 1


# -- pruning sets -----------------------------------------------------------------------

def test_j_ucb_examples():
    _, _, g = _graph(THREE)
    s = _expand(g, g.root)
    _set_stats(s, [(2, 2.0), (2, 1.0), (2, 2.0)])
    assert ab.compute_J_ucb(s, math.inf) == (0, 1, 2)
    assert ab.compute_J_ucb(s, 0.0) == (0, 2)


def test_j_ucb_arithmetic_example():
    _, _, g = _graph(THREE.replace("edge r 2 c:1 r=0\n", "").replace("state c terminal\n", ""))
    s = _expand(g, g.root)
    _set_stats(s, [(4, 4.0), (4, 2.0)])
    bonus = math.sqrt(math.log(8) / 4)
    assert bonus == pytest.approx(0.721, abs=5e-4)
    assert ab.compute_J_ucb(s, 1.0, sigma=1.0) == (0, 1)
    # scaled: lambda_p * sigma
    assert ab.compute_J_ucb(s, 0.5, sigma=2.0) == (0, 1)
    assert ab.compute_J_ucb(s, 0.5, sigma=1.0) == (0,)
    assert ab.compute_J_ucb(s, 0.5, sigma=1.0, scaled=False) == (0,)


def test_j_requires_expansion():
    _, _, g = _graph(THREE)
    s = g.root
    g.add_q(s)
    with pytest.raises(ab.NotFullyExpanded):
        ab.compute_J_ucb(s, 0.0)
    _expand(g, s)  # children exist but are unvisited
    for fn in (lambda: ab.compute_J_ucb(s, 0.0), lambda: ab.conf_prune(s, 0.9), lambda: ab.topn_prune(s, 1, 0)):
        with pytest.raises(ab.NotFullyExpanded):
            fn()


def _with_spread(s, rows):
    for q, (n, mean, sd) in zip(s.children, rows):
        q.N, q.V = n, mean * n
        q.V2 = (n - 1) * sd * sd + n * mean * mean
    s.nsum = s.visits = sum(r[0] for r in rows)


def test_conf_prune_examples():
    _, _, g = _graph(THREE.replace("edge r 2 c:1 r=0\n", "").replace("state c terminal\n", ""))
    s = _expand(g, g.root)
    _with_spread(s, [(1, 1.0, 0.0), (1, 0.0, 0.0)])
    assert ab.conf_prune(s, 0.9) == (0, 1)
    _with_spread(s, [(10, 0.5, 0.2), (10, 0.5, 0.2)])
    assert ab.conf_prune(s, 0.9) == (0, 1)
    # standard errors 0.1 / sqrt(100) = 0.01
    _with_spread(s, [(100, 1.0, 0.1), (100, 0.0, 0.1)])
    assert ab.conf_prune(s, 0.9) == (0,)
    assert ab.conf_z(0.9) == pytest.approx(1.6448536, abs=1e-6)


def test_topn_examples():
    _, _, g = _graph(THREE)
    s = _expand(g, g.root)
    _set_stats(s, [(2, 0.6), (2, 1.8), (2, 0.2)])
    assert ab.topn_prune(s, 1, n_min=100) == (0, 1, 2)
    assert ab.topn_prune(s, 1, n_min=6) == (1,)
    assert ab.topn_prune(s, 2, n_min=0) == (0, 1)
    assert ab.topn_prune(s, 3, n_min=0) == (0, 1, 2)
    _set_stats(s, [(2, 1.0), (2, 1.0), (2, 1.0)])
    assert ab.topn_prune(s, 1, 0) == (0,)


def test_stored_j_defaults_to_all_actions():
    _, _, g = _graph(THREE)
    s = _expand(g, g.root)
    assert ab.stored_J(s) == (0, 1, 2)
    s.J, s.updated = (1,), True
    assert ab.stored_J(s) == (1,)


# -- state rule --------------------------------------------------------------------------

def test_states_similar_reflexive():
    _, _, g = _graph(THREE)
    s = _expand(g, g.root)
    assert ab.states_similar(s, s, (0,), (1, 2))


def test_navigation_cells_12_and_14():
    nav = build_domain("navigation_fig2")
    model = ModelCache(nav)
    g = SearchGraph(model, model.intern(nav.state(3)), 10)
    s12 = _expand(g, g.add_state(model.intern(nav.state(12)), 1))
    s14 = _expand(g, g.add_state(model.intern(nav.state(14)), 1))
    ctx = _ctx(g)
    for q in s12.children + s14.children:
        ab.update_q_abstraction(q, ctx, force=True)
    right12, left14 = s12.children[3], s14.children[2]
    assert right12.group is left14.group  # both move to cell 13 for -1
    assert ab.states_similar(s12, s14, (3,), (2,))
    assert not ab.states_similar(s12, s14, (0, 1, 2, 3), (0, 1, 2, 3))


def test_unexpanded_state_stays_singleton():
    _, _, g = _graph(CHAIN2)
    g.add_q(g.root)
    ctx = _ctx(g)
    for _ in range(9):
        assert not ab.update_state_abstraction(g.root, ctx)
    assert g.root.group.size == 1 and not g.root.updated


@pytest.mark.parametrize("lambda_p", [0.0, 1.0])
def test_fig1_left_grouped_online_by_ipa_only(lambda_p, backend):
    dom = layered_domain(FIG1_LEFT)

    def grouped(cfg):
        snap = run_search(dom, cfg, seed=2, backend=backend).snapshot()
        depth1 = [g for g in snap.state_groups() if g[2] == 1]
        return any(len(g[5]) == 2 for g in depth1)

    assert grouped(ipa(lambda_p, iterations=400))
    assert not grouped(oga(iterations=400))


# -- aggregates and moves ---------------------------------------------------------------------

def test_aggregate_stats_sum_members():
    _, _, g = _graph(CHAIN2)
    q0, q1 = _expand(g, g.root).children
    _set_stats(g.root, [(2, 1.0), (3, 2.0)])
    assert ab.aggregate_stats(q0.group) == (2, 1.0)
    ab.move_node(g, q1, q0.group, lambda: 0.0)
    assert ab.aggregate_stats(q0.group) == (5, 3.0)
    assert q1.group is q0.group and len(g.q_groups[0]) == 1


def test_representative_reassigned_when_it_leaves():
    _, _, g = _graph(CHAIN2)
    q0, q1 = _expand(g, g.root).children
    ab.move_node(g, q1, q0.group, lambda: 0.0)
    group = q0.group
    assert group.rep is q0
    ab.move_node(g, q0, None, lambda: 0.0)
    assert group.rep is q1 and q0.group.rep is q0


# -- RSTATE -----------------------------------------------------------------------------------

def _two_states():
    dom = layered_domain(CHAIN2.replace("edge r 1 x:1 r=1", "edge r 1 y:1 r=1").replace(
        "state x\nedge x 0 t:1 r=0", "state x\nstate y\nedge x 0 t:1 r=0\nedge y 0 t:1 r=0"))
    model = ModelCache(dom)
    g = SearchGraph(model, model.intern(dom.initial_state()), dom.horizon)
    _expand(g, g.root)
    x, y = (q.succ[0] for q in g.root.children)
    return g, x, y


def test_rstate_p_move_zero_never_moves():
    g, x, _ = _two_states()
    ctx = _ctx(g, AbstractionPolicy(variant="RSTATE", p_move=0.0))
    assert not any(ab.rstate_update(x, ctx) for _ in range(100))


def test_rstate_single_group_stays():
    _, _, g = _graph(CHAIN2)
    _expand(g, g.root)
    x = g.root.children[0].succ[0]
    ctx = _ctx(g, AbstractionPolicy(variant="RSTATE", p_move=1.0))
    assert not ab.rstate_update(x, ctx)
    assert x.group.size == 1


def test_rstate_moves_half_the_time():
    rng = np.random.default_rng(12)
    n = 10_000
    moved = 0
    policy = AbstractionPolicy(variant="RSTATE", p_move=1.0)
    for _ in range(n):
        g, x, y = _two_states()
        ctx = ab.AbstractionContext(g, policy, 3, rng.random)
        ab.rstate_update(x, ctx)
        moved += x.group is y.group
    assert abs(moved / n - 0.5) <= 3 * math.sqrt(0.25 / n)


# -- invariants under search --------------------------------------------------------------------

@pytest.mark.parametrize("cfg", [
    oga(iterations=1),
    ipa(0.0, iterations=1),
    ipa(1.0, iterations=1),
    SearchConfig(iterations=1, abstraction_policy=AbstractionPolicy(variant="RSTATE", p_move=0.3)),
    SearchConfig(iterations=1, abstraction_policy=AbstractionPolicy(variant="CONF", p_c=0.8)),
    SearchConfig(iterations=1, abstraction_policy=AbstractionPolicy(variant="TOPN", n_matches=1, n_min=5)),
    oga(eps_a=0.5, eps_t=0.3, alpha=0.2, iterations=1),
], ids=["oga", "ipa0", "ipa1", "rstate", "conf", "topn", "eps"])
@pytest.mark.parametrize("name", ["navigation_fig2", "sysadmin", "game_of_life"])
def test_partition_and_aggregates_every_hundred_iterations(cfg, name, backend):
    dom = build_domain(name)
    eng = run_search(dom, cfg, seed=5, backend=backend, iterations=0)
    for _ in range(10):
        eng.run(100)
        check_partition(eng.snapshot())


def _expanded_nodes(eng):
    return [s for s in eng.graph.states
            if s.fully_expanded and all(c.N for c in s.children)]


@pytest.mark.parametrize("name", ["navigation_fig2", "sysadmin", "sailing_wind"])
def test_j_monotone_and_contains_argmax(name):
    dom = build_domain(name)
    model = ModelCache(dom)
    eng = PyEngine(model, uct(iterations=800), np.random.default_rng(0), model.intern(dom.initial_state()), dom.horizon)
    eng.run()
    nodes = _expanded_nodes(eng)
    assert nodes
    grid = [0.0, 0.1, 0.5, 1.0, 3.0, math.inf]
    for s in nodes:
        qs = [c.V / c.N for c in s.children]
        best = {a for a, q in enumerate(qs) if q == max(qs)}
        prev = set()
        for lam in grid:
            kept = set(ab.compute_J_ucb(s, lam, sigma=2.0))
            assert prev <= kept and best <= kept
            prev = kept
        assert best <= set(ab.conf_prune(s, 0.9))


# -- reductions ---------------------------------------------------------------------------------

def test_ipa_infinite_lambda_equals_oga_step_by_step(backend):
    dom = build_domain("navigation_fig2")
    a = run_search(dom, oga(iterations=1), seed=8, backend=backend, iterations=0)
    b = run_search(dom, ipa(math.inf, iterations=1), seed=8, backend=backend, iterations=0)
    for _ in range(300):
        a.run(1)
        b.run(1)
        assert a.snapshot().group_structure() == b.snapshot().group_structure()
    assert a.decide() == b.decide()


def test_pruned_oga_alpha_zero_equals_oga(backend):
    dom = build_domain("sysadmin")
    a = run_search(dom, oga(iterations=500), seed=3, backend=backend).snapshot()
    b = run_search(dom, oga(alpha=0.0, iterations=500), seed=3, backend=backend).snapshot()
    assert a == b
    c = run_search(dom, oga(alpha=0.5, iterations=500), seed=3, backend=backend).snapshot()
    assert c.group_structure() != a.group_structure()
