"""Game of Life on a bounded grid with a gardener.

Each step the agent brings one cell to life, then the board evolves under the
B3/S23 rule and every cell's outcome is flipped independently with
probability ``noise``.  Reward is the number of live cells before the move.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mdp import Domain, EnvState, InvalidSpec, MdpDescriptor


@dataclass(frozen=True)
class GameOfLifeSpec:
    rows: int = 3
    cols: int = 3
    noise: float = 0.05
    initial_alive: tuple[int, ...] = (1, 4, 7)
    horizon: int = 50

    def validate(self) -> None:
        if self.rows < 1 or self.cols < 1 or self.rows * self.cols > 16:
            raise InvalidSpec("game of life grid must have 1..16 cells")
        if not 0.0 <= self.noise <= 0.5:
            raise InvalidSpec("noise must lie in [0, 0.5]")
        if any(not 0 <= c < self.rows * self.cols for c in self.initial_alive):
            raise InvalidSpec("initial_alive cell out of range")


class GameOfLife(Domain):
    def __init__(self, spec: GameOfLifeSpec = GameOfLifeSpec(), name: str = "game_of_life"):
        spec.validate()
        self.spec = spec
        self.descriptor = MdpDescriptor(name, spec.horizon)
        n = spec.rows * spec.cols
        self.cells = n
        self._nbrs = []
        for i in range(n):
            r, c = divmod(i, spec.cols)
            self._nbrs.append([
                rr * spec.cols + cc
                for rr in (r - 1, r, r + 1) for cc in (c - 1, c, c + 1)
                if (rr, cc) != (r, c) and 0 <= rr < spec.rows and 0 <= cc < spec.cols
            ])
        masks = np.arange(1 << n)
        self._bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
        self._states: dict[int, EnvState] = {}

    def state(self, mask: int) -> EnvState:
        s = self._states.get(mask)
        if s is None:
            s = self._states[mask] = EnvState(mask.to_bytes(2, "little"))
        return s

    @staticmethod
    def mask_of(state: EnvState) -> int:
        return int.from_bytes(state.payload, "little")

    def initial_state(self):
        return self.state(sum(1 << c for c in self.spec.initial_alive))

    def legal_actions(self, state):
        return list(range(self.cells))

    def num_actions(self, state):
        return self.cells

    def step_deterministic(self, mask: int) -> int:
        out = 0
        for i in range(self.cells):
            k = sum(mask >> j & 1 for j in self._nbrs[i])
            if k == 3 or (k == 2 and mask >> i & 1):
                out |= 1 << i
        return out

    def _transitions(self, state, action):
        nxt = self.step_deterministic(self.mask_of(state) | 1 << action)
        eps = self.spec.noise
        alive = np.array([nxt >> i & 1 for i in range(self.cells)], dtype=bool)
        p_alive = np.where(alive, 1.0 - eps, eps)
        probs = np.where(self._bits, p_alive, 1.0 - p_alive).prod(axis=1)
        return [(self.state(int(m)), float(probs[m])) for m in np.flatnonzero(probs > 0.0)]

    def reward(self, state, action):
        self.check_action(state, action)
        return float(bin(self.mask_of(state)).count("1"))
