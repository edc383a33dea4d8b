"""Grid navigation with probabilistic resets to the start cell.

Cells are numbered ``x + 1 + width * y`` with ``y = 0`` the bottom row.
Actions, in canonical order: 0 up, 1 down, 2 left, 3 right.  A move that
would leave the grid keeps the agent in place.  After a move onto cell ``c``
the agent is sent back to the start cell with probability ``reset_prob(c)``.

Every move costs 1, including off-grid moves, moves that end in a reset and
the move that enters the goal.  Reaching the goal ends the episode.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..mdp import Domain, EnvState, InvalidSpec, MdpDescriptor

UP, DOWN, LEFT, RIGHT = range(4)
ACTION_NAMES = ("up", "down", "left", "right")
_MOVES = {UP: (0, 1), DOWN: (0, -1), LEFT: (-1, 0), RIGHT: (1, 0)}


@dataclass(frozen=True)
class NavigationSpec:
    width: int
    height: int
    start_cell: int
    goal_cell: int
    # reset probability per cell, indexed by cell number - 1
    reset_prob: tuple[float, ...] = field(default=())
    horizon: int = 50

    @classmethod
    def from_black_cells(
        cls, width: int, height: int, start_cell: int, goal_cell: int,
        black_cells, black_prob: float = 0.5, horizon: int = 50,
    ) -> "NavigationSpec":
        probs = [0.0] * (width * height)
        for c in black_cells:
            probs[c - 1] = black_prob
        return cls(width, height, start_cell, goal_cell, tuple(probs), horizon)

    def validate(self) -> None:
        if self.width < 1 or self.height < 1:
            raise InvalidSpec("navigation grid must be at least 1x1")
        n = self.width * self.height
        if len(self.reset_prob) != n:
            raise InvalidSpec(f"reset_prob needs {n} entries, got {len(self.reset_prob)}")
        for name, c in (("start_cell", self.start_cell), ("goal_cell", self.goal_cell)):
            if not 1 <= c <= n:
                raise InvalidSpec(f"{name}={c} outside 1..{n}")
        if self.start_cell == self.goal_cell:
            raise InvalidSpec("start_cell and goal_cell must differ")
        if any(not 0.0 <= p <= 1.0 for p in self.reset_prob):
            raise InvalidSpec("reset probabilities must lie in [0, 1]")
        if self.reset_prob[self.goal_cell - 1] != 0.0:
            raise InvalidSpec("the goal cell must have reset probability 0")


# The 5x4 instance: start at cell 3, goal at cell 18, shaded cells reset w.p. 0.5.
FIG2_BLACK_CELLS = (1, 5, 6, 8, 10, 15, 16, 17, 19, 20)


def fig2_spec(horizon: int = 50) -> NavigationSpec:
    return NavigationSpec.from_black_cells(5, 4, 3, 18, FIG2_BLACK_CELLS, 0.5, horizon)


class Navigation(Domain):
    def __init__(self, spec: NavigationSpec, name: str = "navigation"):
        spec.validate()
        self.spec = spec
        self.descriptor = MdpDescriptor(name, spec.horizon)
        self._states = [None] + [self._make(c) for c in range(1, spec.width * spec.height + 1)]

    def _make(self, cell: int) -> EnvState:
        return EnvState(cell.to_bytes(2, "little"), 0, cell == self.spec.goal_cell)

    def state(self, cell: int) -> EnvState:
        return self._states[cell]

    @staticmethod
    def cell_of(state: EnvState) -> int:
        return int.from_bytes(state.payload, "little")

    def state_label(self, state):
        return str(self.cell_of(state))

    def initial_state(self) -> EnvState:
        return self._states[self.spec.start_cell]

    def legal_actions(self, state):
        return [] if state.is_terminal else [UP, DOWN, LEFT, RIGHT]

    def num_actions(self, state):
        return 0 if state.is_terminal else 4

    def action_label(self, state, action):
        return ACTION_NAMES[action]

    def destination(self, cell: int, action: int) -> int | None:
        """Target cell of a move, or ``None`` when the move leaves the grid."""
        w, h = self.spec.width, self.spec.height
        x, y = (cell - 1) % w, (cell - 1) // w
        dx, dy = _MOVES[action]
        nx, ny = x + dx, y + dy
        if 0 <= nx < w and 0 <= ny < h:
            return nx + 1 + w * ny
        return None

    def _transitions(self, state, action):
        cell = self.cell_of(state)
        dest = self.destination(cell, action)
        if dest is None:
            return [(state, 1.0)]
        p = self.spec.reset_prob[dest - 1]
        return [(self._states[dest], 1.0 - p), (self._states[self.spec.start_cell], p)]

    def reward(self, state, action):
        self.check_action(state, action)
        return -1.0
