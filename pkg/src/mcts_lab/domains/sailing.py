"""Sailing Wind: reach the far corner of a square lake under shifting wind.

State is the boat position and the wind direction (eight compass points,
0 = north, clockwise).  Headings use the same encoding; sailing straight into
the wind is not allowed, so the legal actions are the seven other headings in
increasing order.  The cost of a step grows as the heading closes on the
wind.  After each step the wind veers by 45 degrees either way with
probability ``shift_prob`` each.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..mdp import Domain, EnvState, InvalidSpec, MdpDescriptor

HEADINGS = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))
# cost by angular distance (in 45-degree units) between heading and wind origin
LEG_COST = {1: 4.0, 2: 3.0, 3: 2.0, 4: 1.0}


@dataclass(frozen=True)
class SailingSpec:
    size: int = 5
    shift_prob: float = 0.3
    initial_wind: int = 0
    horizon: int = 50

    def validate(self) -> None:
        if self.size < 2 or self.size > 200:
            raise InvalidSpec("lake size must be in 2..200")
        if not 0.0 <= self.shift_prob <= 0.5:
            raise InvalidSpec("shift_prob must lie in [0, 0.5]")
        if not 0 <= self.initial_wind < 8:
            raise InvalidSpec("initial_wind must be in 0..7")


class SailingWind(Domain):
    def __init__(self, spec: SailingSpec = SailingSpec(), name: str = "sailing_wind"):
        spec.validate()
        self.spec = spec
        self.descriptor = MdpDescriptor(name, spec.horizon)
        self.goal = (spec.size - 1, spec.size - 1)

    def state(self, x: int, y: int, wind: int) -> EnvState:
        return EnvState(bytes((x, y, wind)), 0, (x, y) == self.goal)

    def initial_state(self):
        return self.state(0, 0, self.spec.initial_wind)

    def headings(self, state: EnvState) -> list[int]:
        if state.is_terminal:
            return []
        wind = state.payload[2]
        return [h for h in range(8) if h != wind]

    def legal_actions(self, state):
        return list(range(len(self.headings(state))))

    def num_actions(self, state):
        return 0 if state.is_terminal else 7

    def action_label(self, state, action):
        return self.headings(state)[action]

    def _transitions(self, state, action):
        x, y, wind = state.payload
        dx, dy = HEADINGS[self.headings(state)[action]]
        nx, ny = x + dx, y + dy
        if not (0 <= nx < self.spec.size and 0 <= ny < self.spec.size):
            nx, ny = x, y
        q = self.spec.shift_prob
        return [
            (self.state(nx, ny, wind), 1.0 - 2 * q),
            (self.state(nx, ny, (wind + 1) % 8), q),
            (self.state(nx, ny, (wind - 1) % 8), q),
        ]

    def reward(self, state, action):
        self.check_action(state, action)
        h = self.headings(state)[action]
        d = abs(h - state.payload[2])
        return -LEG_COST[min(d, 8 - d)]
