"""SysAdmin: keep a network of machines running.

Action ``i < n`` reboots machine ``i``; action ``n`` does nothing.  A rebooted
machine is up in the next step.  A running machine stays up with probability
``p_base + p_neighbors * (running neighbours / neighbours)``; a crashed
machine stays down until rebooted.  Reward per step is the number of running
machines minus ``reboot_cost`` when a reboot is issued.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..mdp import Domain, EnvState, InvalidSpec, MdpDescriptor


@dataclass(frozen=True)
class SysAdminSpec:
    machines: int = 4
    topology: str = "ring"  # "ring" or "grid"
    rows: int = 0
    cols: int = 0
    p_base: float = 0.45
    p_neighbors: float = 0.5
    reboot_cost: float = 0.75
    horizon: int = 50

    def validate(self) -> None:
        if self.topology == "grid":
            if self.rows < 1 or self.cols < 1 or self.rows * self.cols != self.machines:
                raise InvalidSpec("grid topology needs rows * cols == machines")
        elif self.topology != "ring":
            raise InvalidSpec(f"unknown topology {self.topology!r}")
        if not 1 <= self.machines <= 16:
            raise InvalidSpec("machines must be in 1..16")
        if not (0.0 <= self.p_base and self.p_base + self.p_neighbors <= 1.0 and self.p_neighbors >= 0.0):
            raise InvalidSpec("p_base + p_neighbors must stay within [0, 1]")


def _neighbours(spec: SysAdminSpec) -> list[tuple[int, ...]]:
    n = spec.machines
    if spec.topology == "ring":
        return [tuple(sorted({(i - 1) % n, (i + 1) % n} - {i})) for i in range(n)]
    out = []
    for i in range(n):
        r, c = divmod(i, spec.cols)
        nb = [
            rr * spec.cols + cc
            for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1))
            if 0 <= rr < spec.rows and 0 <= cc < spec.cols
        ]
        out.append(tuple(nb))
    return out


class SysAdmin(Domain):
    def __init__(self, spec: SysAdminSpec = SysAdminSpec(), name: str = "sysadmin"):
        spec.validate()
        self.spec = spec
        self.descriptor = MdpDescriptor(name, spec.horizon)
        self.neighbours = _neighbours(spec)
        self._cache: dict[int, EnvState] = {}

    def state(self, mask: int) -> EnvState:
        s = self._cache.get(mask)
        if s is None:
            s = self._cache[mask] = EnvState(mask.to_bytes(2, "little"))
        return s

    @staticmethod
    def mask_of(state: EnvState) -> int:
        return int.from_bytes(state.payload, "little")

    def initial_state(self):
        return self.state((1 << self.spec.machines) - 1)

    def legal_actions(self, state):
        return list(range(self.spec.machines + 1))

    def num_actions(self, state):
        return self.spec.machines + 1

    def up_probabilities(self, mask: int, action: int) -> list[float]:
        probs = []
        for i in range(self.spec.machines):
            if i == action:
                probs.append(1.0)
            elif mask >> i & 1:
                nb = self.neighbours[i]
                frac = sum(mask >> j & 1 for j in nb) / len(nb) if nb else 1.0
                probs.append(self.spec.p_base + self.spec.p_neighbors * frac)
            else:
                probs.append(0.0)
        return probs

    def _transitions(self, state, action):
        dist = {0: 1.0}
        for i, p in enumerate(self.up_probabilities(self.mask_of(state), action)):
            nxt: dict[int, float] = {}
            for m, q in dist.items():
                if p > 0.0:
                    nxt[m | 1 << i] = nxt.get(m | 1 << i, 0.0) + q * p
                if p < 1.0:
                    nxt[m] = nxt.get(m, 0.0) + q * (1.0 - p)
            dist = nxt
        return [(self.state(m), q) for m, q in dist.items()]

    def reward(self, state, action):
        self.check_action(state, action)
        running = bin(self.mask_of(state)).count("1")
        return running - (self.spec.reboot_cost if action < self.spec.machines else 0.0)
