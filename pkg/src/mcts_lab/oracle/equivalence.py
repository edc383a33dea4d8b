"""How often do random local continuations land on value-equivalent states?

For column ``i`` a state is sampled, then ``i + 1`` uniformly random actions
are applied independently to the state and to a copy of it.  ``V_abs(i)`` is
the fraction of samples whose two end states share ``V*``; ``Q_abs(i)`` the
fraction whose last state-action pairs share ``Q*``.
"""
from __future__ import annotations

from itertools import accumulate

import numpy as np

from ..mdp import sample_index
from .layered import LayeredMdp
from .values import VALUE_TOL, ValueTables


def _sample_start(mdp: LayeredMdp, steps: int, rng: np.random.Generator, max_tries: int = 1000):
    """Random-walk state with at least ``steps`` non-terminal steps of room below it."""
    last = mdp.depth - steps
    for _ in range(max_tries):
        depth = int(rng.random() * (last + 1)) if last >= 0 else 0
        d, s = 0, mdp.layers[0][int(rng.random() * len(mdp.layers[0]))]
        ok = True
        while d < depth:
            if mdp.is_terminal(d, s):
                ok = False
                break
            s = _step(mdp, d, s, rng)[0]
            d += 1
        if ok and not mdp.is_terminal(d, s):
            return d, s
    raise ValueError("could not sample a non-terminal state with enough remaining depth")


def _step(mdp: LayeredMdp, d: int, s, rng: np.random.Generator):
    a = int(rng.random() * mdp.num_actions(d, s))
    dist = mdp.transitions[(d, s, a)]
    cum = list(accumulate(p for _, p in dist))
    return dist[sample_index(cum, rng.random())][0], a


def value_equivalence_ratios(
    mdp: LayeredMdp,
    values: ValueTables,
    samples: int,
    rng: np.random.Generator,
    steps=(0, 1, 2),
    tol: float = VALUE_TOL,
) -> dict[int, tuple[float, float]]:
    out = {}
    for i in steps:
        v_hits = q_hits = done = 0
        while done < samples:
            d0, s0 = _sample_start(mdp, i + 1, rng)
            ends = []
            for _copy in range(2):
                d, s, q = d0, s0, None
                for _ in range(i + 1):
                    if mdp.is_terminal(d, s):
                        break
                    nxt, a = _step(mdp, d, s, rng)
                    q = values.Q[(d, s, a)]
                    s, d = nxt, d + 1
                else:
                    ends.append((values.V[(d, s)], q))
                    continue
                break
            if len(ends) < 2:
                continue  # a copy hit a terminal state early; resample
            done += 1
            v_hits += abs(ends[0][0] - ends[1][0]) <= tol
            q_hits += abs(ends[0][1] - ends[1][1]) <= tol
        out[i] = (v_hits / samples, q_hits / samples)
    return out
