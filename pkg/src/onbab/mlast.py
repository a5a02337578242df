"""Multi-sink LAST: sources and sinks arrive online.

The output H = F + A keeps every source within 3 times its distance to
the nearest sink. F hooks each source to the nearest terminal of higher
net class; A holds direct source-to-sink augmentation edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import EdgeSet, dijkstra, relax_new_edge
from .metric import OnlineMetric, TOL, floor_log2, gt, leq
from .nets import NetHierarchy

STRETCH = 3.0


class FirstNotSink(ValueError):
    pass


@dataclass
class MlastStep:
    step: int
    terminal: int
    role: str
    klass: float
    f_edge: tuple | None = None
    a_edges: list = field(default_factory=list)

    def trace(self) -> dict:
        return {"step": self.step, "terminal": self.terminal, "role": self.role,
                "class": _jsonable(self.klass), "f_edge": list(self.f_edge) if self.f_edge else None,
                "a_edges_added": [list(e) for e in self.a_edges]}


def _jsonable(c):
    return "inf" if c == math.inf else int(c)


def pow2(c: float) -> float:
    return math.inf if c == math.inf else 2.0 ** c


class Mlast:
    def __init__(self, metric: OnlineMetric, tol: float = TOL):
        self.metric = metric
        self.tol = tol
        self.nets = NetHierarchy(metric, 1.0, tol=tol)
        self.F = EdgeSet()
        self.A = EdgeSet()
        self.sources: list[int] = []
        self.sinks: list[int] = []
        self.order: list[int] = []
        self.parent: dict[int, int] = {}
        self.delta = 0.0
        self.steps: list[MlastStep] = []
        self._dist: dict[int, float] = {}  # d_H(., S)

    @property
    def graphs(self):
        return (self.F, self.A)

    @property
    def klass(self) -> dict:
        return self.nets.klass

    @property
    def first(self) -> int | None:
        return self.order[0] if self.order else None

    def H(self) -> EdgeSet:
        h = self.F.copy()
        for u, v, w in self.A:
            h.add(u, v, w)
        return h

    def _higher_nearest(self, v: int) -> tuple[int, float]:
        c = self.klass[v]
        best, key = None, None
        for u in self.order:
            if u == v or self.klass[u] <= c:
                continue
            k = (self.metric.d(u, v), -self.klass[u], u)
            if key is None or k < key:
                best, key = u, k
        return best, key[0]

    def insert(self, v: int, role: str) -> MlastStep:
        if role not in ("source", "sink"):
            raise ValueError(f"role must be source or sink, not {role!r}")
        if not self.order and role != "sink":
            raise FirstNotSink("the first terminal must be a sink")
        if self.sinks:
            self.delta = max(self.delta, float(self.metric.dists(v, self.sinks).min()))
        c = self.nets.insert(v)
        self.order.append(v)
        self.F.add_node(v)
        step = MlastStep(len(self.steps), v, role, c)
        if role == "source":
            u, du = self._higher_nearest(v)
            self.F.add(u, v, du)
            self.parent[v] = u
            step.f_edge = (v, u, du)
            self.sources.append(v)
            relax_new_edge(self.graphs, self._dist, u, v, du)
        else:
            self.sinks.append(v)
            self._dist[v] = 0.0  # a new sink has no edges yet
        self._augment(step)
        self.steps.append(step)
        return step

    def _augment(self, step: MlastStep) -> None:
        S = self.sinks
        for x in self.sources:
            dxS = self.metric.dists(x, S)
            target = float(dxS.min())
            if gt(self._dist.get(x, math.inf), STRETCH * target, self.tol):
                s = S[int(np.argmin(dxS))]
                self.A.add(x, s, target)
                step.a_edges.append((x, s, target))
                relax_new_edge(self.graphs, self._dist, x, s, target)

    # checks and reports --------------------------------------------------
    def sink_distances(self) -> dict[int, float]:
        """d_H(., S) recomputed from scratch."""
        dist, _, _ = dijkstra(self.graphs, self.sinks)
        return dist

    def stretches(self) -> dict[int, float]:
        dist = self.sink_distances()
        return {x: dist.get(x, math.inf) / float(self.metric.dists(x, self.sinks).min()) for x in self.sources}

    def class_separation_violations(self) -> list[tuple[int, int]]:
        bad = []
        by_class: dict = {}
        for v in self.order:
            by_class.setdefault(self.klass[v], []).append(v)
        for c, vs in by_class.items():
            if c == math.inf or len(vs) < 2:
                continue
            D = self.metric.matrix()[np.ix_(vs, vs)]
            iu = np.triu_indices(len(vs), 1)
            viol = np.flatnonzero(D[iu] < 2.0 ** c * (1 - self.tol))
            bad += [(vs[iu[0][i]], vs[iu[1][i]]) for i in viol]
        return bad

    def class_bound_violations(self) -> list[int]:
        """Sources violating d(u, earlier)/2 <= 2^class(u) <= d(u, s*)."""
        bad = []
        pos = {v: i for i, v in enumerate(self.order)}
        for u in self.sources:
            earlier = self.order[: pos[u]]
            lo = float(self.metric.dists(u, earlier).min()) / 2
            p = pow2(self.klass[u])
            if not (leq(lo, p, self.tol) and leq(p, self.metric.d(u, self.first), self.tol)):
                bad.append(u)
        return bad

    def f_edge_violations(self) -> list[int]:
        """Sources whose F-edge is longer than 2^(class+1) or goes to a
        terminal that is not of strictly higher class."""
        bad = []
        for v, u in self.parent.items():
            if not self.klass[u] > self.klass[v] or not leq(self.metric.d(u, v), 2 * pow2(self.klass[v]), self.tol):
                bad.append(v)
        return bad

    def _tree_dist_up(self, t: int) -> list[tuple[int, float]]:
        """Ancestors of t with their F-distance from t (t itself first)."""
        out, d, u = [(t, 0.0)], 0.0, t
        while u in self.parent:
            p = self.parent[u]
            d += self.metric.d(u, p)
            out.append((p, d))
            u = p
        return out

    def ancestor_chain_violations(self) -> list[tuple[int, int]]:
        """(t, u) with u the parent of an ancestor v of t and
        d_T(t, u) > 2^(class(v)+2) or > 2^(class(u)+1)."""
        bad = []
        for t in self.sources:
            chain = self._tree_dist_up(t)
            for (v, _), (u, dtu) in zip(chain, chain[1:]):
                if not (leq(dtu, 4 * pow2(self.klass[v]), self.tol) and leq(dtu, 2 * pow2(self.klass[u]), self.tol)):
                    bad.append((t, u))
        return bad

    def charging(self) -> tuple[dict, list]:
        """Charge each A-edge of length in [2^j, 2^(j+1)) to a source
        ancestor of its source endpoint. Returns (charges, problems) with
        charges[(j, z)] = list of charging edges."""
        charges: dict = {}
        problems = []
        for x, s, w in self.A:
            if x not in self.parent:
                x, s = s, x
            j = floor_log2(w)
            chain = self._tree_dist_up(x)
            if self.klass[x] >= j - 2:
                z, dz = x, 0.0
            else:
                ti = 0
                for i, (a, _) in enumerate(chain):
                    if self.klass[a] <= j - 3:
                        ti = i
                if ti + 1 >= len(chain):
                    problems.append(("no-parent", (x, s)))
                    continue
                z, dz = chain[ti + 1]
            if z not in self.parent or self.klass[z] < j - 2 or not leq(dz, 2.0 ** (j - 1), self.tol):
                problems.append(("bad-target", (x, s), z))
            charges.setdefault((j, z), []).append((x, s, w))
        for key, es in charges.items():
            if len(es) > 1:
                problems.append(("charged-twice", key, es))
        return charges, problems

    def lemma6_report(self) -> dict:
        s = self.stretches()
        charge = sum(pow2(self.klass[v]) for v in self.sources)
        cost = self.F.cost() + self.A.cost()
        _, problems = self.charging()
        return {
            "cost_H": cost,
            "cost_F": self.F.cost(),
            "cost_A": self.A.cost(),
            "charge_sum": charge,
            "C": cost / charge if charge else 0.0,
            "max_sink_stretch": max(s.values(), default=1.0),
            "class_separation_ok": not self.class_separation_violations(),
            "class_bounds_ok": not self.class_bound_violations(),
            "f_edges_ok": not self.f_edge_violations(),
            "ancestor_chains_ok": not self.ancestor_chain_violations(),
            "charging_ok": not problems,
        }
