"""Expose an explicit :class:`LayeredMdp` through the :class:`Domain` interface.

Each ground state carries its depth in the payload, so the same state id in
two layers gives two distinct states.  Depth ``mdp.depth`` is the horizon.
"""
from __future__ import annotations

from ..mdp import Domain, EnvState, MdpDescriptor
from ..oracle.layered import LayeredMdp


class LayeredDomain(Domain):
    def __init__(self, mdp: LayeredMdp, name: str = "layered"):
        mdp.validate()
        self.mdp = mdp
        self.descriptor = MdpDescriptor(name, max(1, mdp.depth), 1.0, 1 + max(mdp.players.values(), default=0))
        self._states: dict[tuple, EnvState] = {}
        for d, s in mdp.state_keys():
            self._states[(d, s)] = EnvState(
                f"{d}:{s}".encode(), mdp.player(d, s), mdp.is_terminal(d, s)
            )
        self._keys = {st: key for key, st in self._states.items()}

    def key_of(self, state: EnvState) -> tuple:
        """``(depth, state id)`` of a ground state."""
        return self._keys[state]

    def state(self, depth: int, sid) -> EnvState:
        return self._states[(depth, sid)]

    def state_label(self, state):
        return str(self._keys[state][1])

    def initial_state(self) -> EnvState:
        return self._states[(0, self.mdp.layers[0][0])]

    def legal_actions(self, state):
        return list(range(self.mdp.num_actions(*self._keys[state])))

    def num_actions(self, state):
        return self.mdp.num_actions(*self._keys[state])

    def _transitions(self, state, action):
        d, s = self._keys[state]
        return [(self._states[(d + 1, t)], p) for t, p in self.mdp.transitions[(d, s, action)]]

    def reward(self, state, action):
        self.check_action(state, action)
        d, s = self._keys[state]
        return self.mdp.rewards[(d, s, action)]
