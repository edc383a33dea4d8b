"""Search-graph data structures of the pure-Python engine and the common snapshot format."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ModelCache


class AbstractNode:
    """A group of same-depth state nodes or Q nodes with aggregate statistics.

    ``members`` keeps join order (a dict used as an ordered set).
    """

    __slots__ = ("kind", "depth", "members", "N", "V", "rep", "creation_id", "terminal")

    def __init__(self, kind: str, depth: int, creation_id: int, terminal: bool = False):
        self.kind = kind
        self.depth = depth
        self.members: dict = {}
        self.N = 0
        self.V = 0.0
        self.rep = None
        self.creation_id = creation_id
        self.terminal = terminal

    @property
    def size(self) -> int:
        return len(self.members)

    def __repr__(self) -> str:
        return f"AbstractNode({self.kind}, d={self.depth}, id={self.creation_id}, size={self.size})"


class StateNode:
    __slots__ = (
        "sid", "depth", "node_id", "terminal", "player", "nact", "children", "parents",
        "visits", "nsum", "group", "recency", "J", "updated",
    )

    def __init__(self, sid: int, depth: int, node_id: int, terminal: bool, player: int, nact: int):
        self.sid = sid
        self.depth = depth
        self.node_id = node_id
        self.terminal = terminal
        self.player = player
        self.nact = nact
        self.children: list[QNode] = []  # created lazily, in action order
        self.parents: list[QNode] = []
        self.visits = 0
        self.nsum = 0  # sum of child visit counts
        self.group: AbstractNode | None = None
        self.recency = 0
        self.J: tuple[int, ...] = ()
        self.updated = False

    @property
    def fully_expanded(self) -> bool:
        return not self.terminal and len(self.children) == self.nact

    def __repr__(self) -> str:
        return f"StateNode(id={self.node_id}, sid={self.sid}, d={self.depth}, n={self.visits})"


class QNode:
    __slots__ = (
        "parent", "action", "node_id", "reward", "succ_sids", "probs", "cum", "succ",
        "n_linked", "N", "V", "V2", "group", "recency",
    )

    def __init__(self, parent: StateNode, action: int, node_id: int, edge):
        self.parent = parent
        self.action = action
        self.node_id = node_id
        self.reward, self.succ_sids, self.probs, self.cum = edge
        self.succ: list[StateNode | None] = [None] * len(self.succ_sids)
        self.n_linked = 0
        self.N = 0
        self.V = 0.0
        self.V2 = 0.0
        self.group: AbstractNode | None = None
        self.recency = 0

    @property
    def fully_expanded(self) -> bool:
        return self.n_linked == len(self.succ)

    @property
    def q(self) -> float:
        return self.V / self.N if self.N else 0.0

    def __repr__(self) -> str:
        return f"QNode(id={self.node_id}, a={self.action}, N={self.N}, Q={self.q:.4g})"


class SearchGraph:
    """Layered DAG with one state node per ``(depth, state)``."""

    def __init__(self, model: ModelCache, root_sid: int, horizon: int):
        self.model = model
        self.horizon = horizon
        self.table: dict[tuple[int, int], StateNode] = {}
        self.states: list[StateNode] = []
        self.qnodes: list[QNode] = []
        self.next_node_id = 0
        self.next_group_id = 0
        # groups per depth, keyed by creation id (dicts keep creation order)
        self.state_groups: list[dict[int, AbstractNode]] = [dict() for _ in range(horizon + 1)]
        self.q_groups: list[dict[int, AbstractNode]] = [dict() for _ in range(horizon)]
        self.terminal_groups: dict[int, AbstractNode] = {}
        # running sums over ground Q values of visited Q nodes
        self.q_count = 0
        self.q_sum = 0.0
        self.q_sumsq = 0.0
        self.root = self.add_state(root_sid, 0)

    # -- groups ---------------------------------------------------------------
    def new_group(self, kind: str, depth: int, terminal: bool = False) -> AbstractNode:
        g = AbstractNode(kind, depth, self.next_group_id, terminal)
        self.next_group_id += 1
        (self.state_groups if kind == "state" else self.q_groups)[depth][g.creation_id] = g
        return g

    def drop_group(self, g: AbstractNode) -> None:
        (self.state_groups if g.kind == "state" else self.q_groups)[g.depth].pop(g.creation_id)

    # -- nodes ----------------------------------------------------------------
    def add_state(self, sid: int, depth: int) -> StateNode:
        m = self.model
        term = m.terminal[sid] or depth >= self.horizon
        node = StateNode(sid, depth, self.next_node_id, term, m.player[sid], 0 if term else m.nact[sid])
        self.next_node_id += 1
        self.table[(depth, sid)] = node
        self.states.append(node)
        if term:
            g = self.terminal_groups.get(depth)
            if g is None:
                g = self.terminal_groups[depth] = self.new_group("state", depth, terminal=True)
                g.rep = node
        else:
            g = self.new_group("state", depth)
            g.rep = node
        g.members[node] = None
        node.group = g
        return node

    def add_q(self, parent: StateNode) -> QNode:
        a = len(parent.children)
        q = QNode(parent, a, self.next_node_id, self.model.fetch(parent.sid, a))
        self.next_node_id += 1
        parent.children.append(q)
        self.qnodes.append(q)
        g = self.new_group("qpair", parent.depth)
        g.rep = q
        g.members[q] = None
        q.group = g
        return q

    def link(self, q: QNode, i: int) -> tuple[StateNode, bool]:
        """Attach successor ``i`` of ``q``; returns the node and whether it is new."""
        depth = q.parent.depth + 1
        sid = q.succ_sids[i]
        node = self.table.get((depth, sid))
        new = node is None
        if new:
            node = self.add_state(sid, depth)
        q.succ[i] = node
        q.n_linked += 1
        node.parents.append(q)
        return node, new

    # -- statistics -------------------------------------------------------------
    def sigma(self, fallback: float) -> float:
        n = self.q_count
        if n < 2:
            return fallback
        mean = self.q_sum / n
        var = self.q_sumsq / n - mean * mean
        if var <= 1e-12 * max(1.0, mean * mean):
            return fallback
        return math.sqrt(var)

    def snapshot(self) -> "GraphSnapshot":
        states = tuple(
            (s.node_id, s.depth, self.model.states[s.sid].payload, s.visits, s.nsum,
             s.group.creation_id, s.recency, s.updated, s.terminal)
            for s in self.states
        )
        qnodes = tuple(
            (q.node_id, q.parent.node_id, q.action, q.N, q.V, q.V2, q.reward,
             q.group.creation_id, q.recency, q.fully_expanded,
             tuple(-1 if t is None else t.node_id for t in q.succ))
            for q in self.qnodes
        )
        groups = []
        for kind, table in (("state", self.state_groups), ("qpair", self.q_groups)):
            for layer in table:
                for g in layer.values():
                    groups.append((g.creation_id, kind, g.depth, g.terminal, g.rep.node_id,
                                   tuple(m.node_id for m in g.members), g.N, g.V))
        groups.sort()
        return GraphSnapshot(states, qnodes, tuple(groups), self.q_count, self.q_sum, self.q_sumsq)


@dataclass(frozen=True)
class GraphSnapshot:
    """Backend-independent, comparable picture of a search graph.

    ``states``: ``(node_id, depth, payload, visits, child_visit_sum, group_id,
    recency, updated, terminal)``; ``qnodes``: ``(node_id, parent_id, action, N,
    V, V2, reward, group_id, recency, fully_expanded, successor_ids)`` with -1
    for unlinked successors; ``groups``: ``(creation_id, kind, depth,
    terminal, rep_id, member_ids, N, V)``.
    """

    states: tuple
    qnodes: tuple
    groups: tuple
    q_count: int
    q_sum: float
    q_sumsq: float

    def group_structure(self) -> tuple:
        """Groups as ``(kind, depth, member ids)``; ignores statistics and ids."""
        return tuple(sorted((g[1], g[2], g[5]) for g in self.groups))

    def state_groups(self) -> list[tuple]:
        return [g for g in self.groups if g[1] == "state"]
