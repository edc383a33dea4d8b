"""Racetrack: drive a car from the start line across the finish line.

State is position and velocity.  Actions are the nine accelerations
``(ax, ay)`` with ``ax, ay`` in ``{-1, 0, 1}`` (index ``3*(ay+1) + ax+1``).
With probability ``slip`` the acceleration is ignored.  Leaving the track
sends the car back to a uniformly chosen start cell with zero velocity.
Each step costs 1.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..mdp import Domain, EnvState, InvalidSpec, MdpDescriptor

DEFAULT_TRACK = (
    "#########",
    "#.....FF#",
    "#.....FF#",
    "#..######",
    "#..#",
    "#SS#",
    "####",
)

ACCELERATIONS = tuple((ax, ay) for ay in (-1, 0, 1) for ax in (-1, 0, 1))


@dataclass(frozen=True)
class RacetrackSpec:
    track: tuple[str, ...] = DEFAULT_TRACK
    slip: float = 0.1
    max_speed: int = 2
    horizon: int = 50

    def validate(self) -> None:
        joined = "".join(self.track)
        if "S" not in joined or "F" not in joined:
            raise InvalidSpec("track needs a non-empty start line 'S' and finish line 'F'")
        if set(joined) - set("#.SF"):
            raise InvalidSpec("track may only contain '#', '.', 'S', 'F'")
        if not 0.0 <= self.slip <= 1.0 or self.max_speed < 1:
            raise InvalidSpec("slip must lie in [0, 1] and max_speed >= 1")


class Racetrack(Domain):
    def __init__(self, spec: RacetrackSpec = RacetrackSpec(), name: str = "racetrack"):
        spec.validate()
        self.spec = spec
        self.descriptor = MdpDescriptor(name, spec.horizon)
        # row 0 of the text is the top; y grows downwards
        self.grid = {
            (x, y): ch for y, row in enumerate(spec.track) for x, ch in enumerate(row)
        }
        self.starts = sorted((x, y) for (x, y), ch in self.grid.items() if ch == "S")
        self.finished = EnvState(b"\xff" * 4, 0, True)

    def state(self, x: int, y: int, vx: int, vy: int) -> EnvState:
        off = self.spec.max_speed
        return EnvState(bytes((x, y, vx + off, vy + off)))

    def decode(self, state: EnvState) -> tuple[int, int, int, int]:
        x, y, vx, vy = state.payload
        off = self.spec.max_speed
        return x, y, vx - off, vy - off

    def initial_state(self):
        return self.state(*self.starts[0], 0, 0)

    def legal_actions(self, state):
        return [] if state.is_terminal else list(range(9))

    def num_actions(self, state):
        return 0 if state.is_terminal else 9

    def action_label(self, state, action):
        return ACCELERATIONS[action]

    def _drive(self, x, y, vx, vy) -> str | tuple[int, int]:
        """Follow the segment to ``(x+vx, y+vy)``; report a crash, the finish, or the end cell."""
        steps = max(abs(vx), abs(vy), 1)
        for k in range(1, steps + 1):
            cx = x + round(vx * k / steps)
            cy = y + round(vy * k / steps)
            ch = self.grid.get((cx, cy), "#")
            if ch == "#":
                return "crash"
            if ch == "F":
                return "finish"
        return (x + vx, y + vy)

    def _outcome(self, x, y, vx, vy, ax, ay) -> list[tuple[EnvState, float]]:
        m = self.spec.max_speed
        nvx = max(-m, min(m, vx + ax))
        nvy = max(-m, min(m, vy + ay))
        res = self._drive(x, y, nvx, nvy)
        if res == "finish":
            return [(self.finished, 1.0)]
        if res == "crash":
            w = 1.0 / len(self.starts)
            return [(self.state(sx, sy, 0, 0), w) for sx, sy in self.starts]
        return [(self.state(res[0], res[1], nvx, nvy), 1.0)]

    def _transitions(self, state, action):
        x, y, vx, vy = self.decode(state)
        ax, ay = ACCELERATIONS[action]
        slip = self.spec.slip
        out = [(s, p * (1.0 - slip)) for s, p in self._outcome(x, y, vx, vy, ax, ay)]
        if slip > 0.0:
            out += [(s, p * slip) for s, p in self._outcome(x, y, vx, vy, 0, 0)]
        return out

    def reward(self, state, action):
        self.check_action(state, action)
        return -1.0
