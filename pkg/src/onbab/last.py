"""Online light approximate shortest-path tree.

Each arriving terminal is hooked to its nearest earlier terminal (the
greedy Steiner tree T). If the shortest path to the root through T and the
direct edges A is longer than 7 times the true distance, a direct edge to
the root is bought instead; otherwise that path is added to the output H.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graph import EdgeSet, dijkstra, shortest_path
from .metric import OnlineMetric, TOL, gt

STRETCH = 7.0


class NoRoot(RuntimeError):
    pass


@dataclass
class LastStep:
    step: int
    terminal: int
    chose_direct: bool
    d_vr: float
    d_Pv: float
    new_edges: list = field(default_factory=list)

    def trace(self) -> dict:
        return {"step": self.step, "terminal": self.terminal, "chose_direct": self.chose_direct,
                "d_vr": self.d_vr, "d_Pv": self.d_Pv, "new_edges": [list(e) for e in self.new_edges]}


class OnlineLast:
    def __init__(self, metric: OnlineMetric, stretch: float = STRETCH, tol: float = TOL):
        self.metric = metric
        self.alpha = stretch
        self.tol = tol
        self.root: int | None = None
        self.terminals: list[int] = []
        self.T = EdgeSet()
        self.A = EdgeSet()
        self.H = EdgeSet()
        self.steps: list[LastStep] = []

    def set_root(self, r: int) -> None:
        self.root = r
        self.terminals.append(r)
        for g in (self.T, self.A, self.H):
            g.add_node(r)

    def insert_terminal(self, v: int) -> LastStep:
        if self.root is None:
            raise NoRoot("set_root must be called first")
        d = self.metric.d
        u, du = self.metric.nearest(v, self.terminals)
        self.T.add(v, u, du)
        self.terminals.append(v)
        dvr = d(v, self.root)
        dPv, path = shortest_path((self.T, self.A), v, self.root)
        new = []
        direct = gt(dPv, self.alpha * dvr, self.tol)
        if direct:
            self.A.add(v, self.root, dvr)
            if self.H.add(v, self.root, dvr):
                new.append((v, self.root, dvr))
        else:
            for a, b in zip(path, path[1:]):
                w = d(a, b)
                if self.H.add(a, b, w):
                    new.append((a, b, w))
        st = LastStep(len(self.steps), v, direct, dvr, dPv, new)
        self.steps.append(st)
        return st

    # reporting -----------------------------------------------------------
    def root_stretches(self) -> dict[int, float]:
        dist, _, _ = dijkstra(self.H, (self.root,))
        return {v: dist.get(v, math.inf) / self.metric.d(v, self.root)
                for v in self.terminals if v != self.root}

    def stretch_and_cost_report(self) -> dict:
        from .oracles import mst_cost

        s = self.root_stretches()
        return {
            "max_root_stretch": max(s.values(), default=1.0),
            "cost_T": self.T.cost(),
            "cost_A": self.A.cost(),
            "cost_H": self.H.cost(),
            "mst_cost": mst_cost(self.metric, self.terminals),
        }

    def direct_pairs_separated(self) -> list[tuple[int, int]]:
        """Pairs of direct-edge terminals v, v' violating
        d_T(v, v') > d(v, r)/2 + d(v', r)/2 (empty when the claim holds)."""
        Z = sorted(v for e in self.A.keys() for v in e if v != self.root)
        bad = []
        for i, v in enumerate(Z):
            dist, _, _ = dijkstra(self.T, (v,))
            for w in Z[i + 1:]:
                bound = (self.metric.d(v, self.root) + self.metric.d(w, self.root)) / 2
                if not gt(dist.get(w, math.inf), bound, self.tol):
                    bad.append((v, w))
        return bad


def run_last(metric: OnlineMetric, order) -> OnlineLast:
    """Drive LAST over ``order`` (first entry is the root), revealing points lazily."""
    order = list(order)
    alg = OnlineLast(metric)
    if metric.capacity > metric.n:
        metric.reveal_until(order[0])
    alg.set_root(order[0])
    for v in order[1:]:
        if metric.capacity > metric.n:
            metric.reveal_until(v)
        alg.insert_terminal(v)
    return alg
