from __future__ import annotations

import pytest

from mcts_lab.domains import build_domain
from mcts_lab.oracle import parse_layered
from mcts_lab.search import available_backends

BACKENDS = available_backends()

# Five deterministic states: r chooses between a and b; a has an extra,
# worse action.  Only the optimal-action view can identify a with b.
FIG1_LEFT = """
layer 0
state r
edge r 0 a:1.0 r=0
edge r 1 b:1.0 r=0
layer 1
state a
state b
edge a 0 c:1.0 r=1
edge a 1 d:1.0 r=0
edge b 0 c:1.0 r=1
layer 2
state c terminal
state d terminal
"""

ALL_DOMAINS = {
    "navigation_fig2": {},
    "sysadmin": {},
    "game_of_life": {},
    "racetrack": {},
    "sailing_wind": {},
    "tictactoe": {},
    "connect4": {},
}


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def nav():
    return build_domain("navigation_fig2")


@pytest.fixture(scope="session")
def fig1_mdp():
    return parse_layered(FIG1_LEFT)


@pytest.fixture(params=sorted(ALL_DOMAINS))
def any_domain(request):
    return build_domain(request.param, ALL_DOMAINS[request.param])


def layered_domain(text: str):
    from mcts_lab.domains import LayeredDomain

    return LayeredDomain(parse_layered(text))


def run_search(domain, config, seed=0, backend=None, iterations=None, model=None):
    """Fresh engine rooted at the initial state, run for its configured iterations."""
    import numpy as np

    from mcts_lab.search import ModelCache, make_engine

    model = model or ModelCache(domain)
    h = domain.horizon
    if config.planning_horizon is not None:
        h = min(h, config.planning_horizon)
    eng = make_engine(model, config, np.random.default_rng(seed), model.intern(domain.initial_state()), h, backend)
    eng.run(iterations)
    return eng


def check_partition(snap):
    """Groups partition the nodes of each depth and carry the member sums."""
    state_group = {s[0]: s[5] for s in snap.states}
    q_group = {q[0]: q[7] for q in snap.qnodes}
    depth = {s[0]: s[1] for s in snap.states}
    visits = {s[0]: s[3] for s in snap.states}
    qstats = {q[0]: (q[3], q[4]) for q in snap.qnodes}
    qdepth = {q[0]: depth[q[1]] for q in snap.qnodes}
    seen_s, seen_q = set(), set()
    for gid, kind, d, terminal, rep, members, N, V in snap.groups:
        assert members and rep in members
        if kind == "state":
            assert all(state_group[m] == gid and depth[m] == d for m in members)
            assert N == sum(visits[m] for m in members)
            seen_s.update(members)
        else:
            assert all(q_group[m] == gid and qdepth[m] == d for m in members)
            assert N == sum(qstats[m][0] for m in members)
            assert V == pytest.approx(sum(qstats[m][1] for m in members), abs=1e-6)
            seen_q.update(members)
    assert seen_s == set(state_group) and seen_q == set(q_group)
    # one terminal group per depth at most
    term = [g[2] for g in snap.groups if g[3]]
    assert len(term) == len(set(term))
