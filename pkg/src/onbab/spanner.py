"""Online multi-commodity spanner.

Terminal pairs arrive online; each pair gets class floor(log2 d(s, t)). At
every scale j up to that class the terminals are clustered around centers
that are 2^j/16 apart, and any two terminals of class at least j whose
distance lies in [2^j, 2^(j+1)) must end up within 4 log k of their
distance in H. A pair that is too stretched gets an augmentation edge plus
bridge edges from both ends to their cluster centers.

Only pairs that involve a terminal newly joining scale j are scanned: a
pair checked earlier stays fine because d_H only shrinks and the threshold
never drops.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .graph import EdgeSet, dijkstra, ekey
from .metric import OnlineMetric, TOL, floor_log2, gt, leq


class ZeroDistancePair(ValueError):
    pass


class NotNormalized(ValueError):
    pass


@dataclass
class PairStep:
    step: int
    pair: tuple[int, int]
    klass: int
    augmentations: list = field(default_factory=list)
    bridges: list = field(default_factory=list)
    k_j: dict = field(default_factory=dict)

    def trace(self) -> dict:
        return {"step": self.step, "pair": list(self.pair), "class": self.klass,
                "augmentations": [list(e) for e in self.augmentations],
                "bridges": [list(e) for e in self.bridges],
                "k_j": {str(j): k for j, k in sorted(self.k_j.items())}}


class Level:
    """Centers, clusters and edges of one distance scale."""

    def __init__(self, j: int):
        self.j = j
        self.members: list[int] = []
        self.centers: list[int] = []
        self.center_of: dict[int, int] = {}
        self.A: list[tuple[int, int]] = []
        self.B: set[tuple[int, int]] = set()
        self.meta: list[tuple[int, int]] = []


def girth(edges: list[tuple[int, int]]) -> float:
    """Shortest cycle length of a multigraph (parallel edges give 2)."""
    seen, adj = set(), {}
    for a, b in edges:
        k = ekey(a, b)
        if k in seen:
            return 2
        seen.add(k)
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    best = math.inf
    for a, b in seen:
        # shortest a-b path avoiding the edge itself
        dist = {a: 0}
        q = deque([a])
        while q:
            x = q.popleft()
            if dist[x] + 1 >= best - 1:
                break
            for y in adj[x]:
                if (x, y) in ((a, b), (b, a)) or y in dist:
                    continue
                dist[y] = dist[x] + 1
                q.append(y)
        if b in dist:
            best = min(best, dist[b] + 1)
    return best


class Spanner:
    """``k`` is the number of pairs in known-k mode; ``k=None`` switches to
    per-scale estimates k_j = |Z_j|."""

    def __init__(self, metric: OnlineMetric, k: int | None = None, tol: float = TOL):
        self.metric = metric
        self.k = k
        self.tol = tol
        self.H = EdgeSet()
        self.levels: dict[int, Level] = {}
        self.klass: dict[int, int] = {}
        self.order: list[int] = []
        self.pairs: list[tuple[int, int]] = []
        self.steps: list[PairStep] = []

    # thresholds -----------------------------------------------------------
    def threshold(self, j: int) -> float:
        k = self.k if self.k is not None else len(self.level(j).centers)
        return 4.0 * max(1.0, math.log2(max(k, 1)))

    def level(self, j: int) -> Level:
        if j not in self.levels:
            self.levels[j] = Level(j)
        return self.levels[j]

    def pair_class(self, s: int, t: int) -> int:
        d = self.metric.d(s, t)
        if d <= 0:
            raise ZeroDistancePair(f"pair ({s}, {t}) has zero length")
        if d < 1 - self.tol:
            raise NotNormalized("spanner needs a normalized metric (all distances >= 1)")
        return max(0, floor_log2(d * (1 + self.tol)))

    # centers ----------------------------------------------------------------
    def _join_level(self, lv: Level, u: int) -> tuple[bool, int]:
        """Make u a center or put it in its nearest center's cluster."""
        r = 2.0 ** lv.j / 16
        if lv.centers:
            dz = self.metric.dists(u, lv.centers)
            i = int(np.argmin(dz))
            if not leq(r, float(dz[i]), self.tol):
                lv.members.append(u)
                lv.center_of[u] = lv.centers[i]
                return False, lv.centers[i]
        lv.centers.append(u)
        lv.members.append(u)
        lv.center_of[u] = u
        return True, u

    def whatif_center_level(self, v: int, mate: int) -> int:
        """Highest j at which v would be a center if the pair (v, mate)
        were inserted now, v first (state is left untouched). -1 if none."""
        c = max(self.klass.get(v, -1), self.pair_class(v, mate))
        best = -1
        for j in range(0, c + 1):
            lv = self.levels.get(j)
            if lv is None or not lv.centers:
                best = j
                continue
            if v in lv.center_of:
                if lv.center_of[v] == v:
                    best = j
                continue
            r = 2.0 ** j / 16
            if leq(r, float(self.metric.dists(v, lv.centers).min()), self.tol):
                best = j
        return best

    # main operation ---------------------------------------------------------
    def insert_pair(self, s: int, t: int) -> PairStep:
        c = self.pair_class(s, t)
        step = PairStep(len(self.steps), (s, t), c)
        self.pairs.append((s, t))
        for u in (s, t):
            if u not in self.klass:
                self.order.append(u)
                self.H.add_node(u)
            self.klass[u] = max(self.klass.get(u, -1), c)
        for j in range(0, c + 1):
            lv = self.level(j)
            for u in (s, t):
                if u in lv.center_of:
                    continue
                self._join_level(lv, u)
                self._scan(lv, u, step)
            step.k_j[j] = len(lv.centers)
        self.steps.append(step)
        return step

    def _candidates(self, lv: Level, u: int) -> list[int]:
        lo, hi = 2.0 ** lv.j, 2.0 ** (lv.j + 1)
        out = []
        for w in lv.members:
            if w == u:
                continue
            d = self.metric.d(u, w)
            if leq(lo, d, self.tol) and d < hi * (1 - self.tol):
                out.append(w)
        return out

    def _scan(self, lv: Level, u: int, step: PairStep) -> None:
        cand = self._candidates(lv, u)
        if not cand:
            return
        dist = None
        for w in cand:
            thr = self.threshold(lv.j)
            duw = self.metric.d(u, w)
            if dist is None:
                dist, _, _ = dijkstra(self.H, (u,), cutoff=thr * 2.0 ** (lv.j + 1))
            if not gt(dist.get(w, math.inf), thr * duw, self.tol):
                continue
            zu, zw = lv.center_of[u], lv.center_of[w]
            bridges = [(a, z) for a, z in ((u, zu), (w, zw)) if a != z]
            self.H.add(u, w, duw)
            lv.A.append((u, w))
            lv.meta.append((zu, zw))
            step.augmentations.append((u, w, duw))
            self._add_bridges(lv, bridges, step)
            dist = None

    def _add_bridges(self, lv: Level, bridges, step: PairStep) -> None:
        for a, z in bridges:
            w = self.metric.d(a, z)
            lv.B.add(ekey(a, z))
            if self.H.add(a, z, w):
                step.bridges.append((a, z, w))

    # reports ------------------------------------------------------------------
    def pair_stretches(self) -> list[float]:
        out = []
        for s, t in self.pairs:
            d, _, _ = dijkstra(self.H, (s,), targets=(t,))
            out.append(d.get(t, math.inf) / self.metric.d(s, t))
        return out

    def girths(self) -> dict[int, float]:
        return {j: girth(lv.meta) for j, lv in sorted(self.levels.items())}

    def stats(self) -> dict:
        st = self.pair_stretches()
        return {
            "cost_H": self.H.cost(),
            "edge_count": len(self.H),
            "max_pair_stretch": max(st, default=1.0),
            "per_scale": {j: {"A": len(lv.A), "B": len(lv.B), "Z": len(lv.centers), "girth": girth(lv.meta)}
                          for j, lv in sorted(self.levels.items())},
        }

    def steiner_forest_lower_bound(self) -> float:
        return max((2.0 ** j / 32 * len(lv.centers) for j, lv in self.levels.items()), default=0.0)

    def girth_bound(self) -> float:
        return math.log2(max(self.k or 1, 1))

    def stretch_violations(self) -> list[tuple[int, int]]:
        bad = []
        for (s, t), x in zip(self.pairs, self.pair_stretches()):
            thr = self.threshold(self.pair_class(s, t))
            if gt(x, thr, self.tol):
                bad.append((s, t))
        return bad

    def cluster_violations(self) -> list[tuple[int, int, int]]:
        """(j, u, z) where u sits 2^j/16 or more from its center z, or an
        A-edge joins a terminal of class below j."""
        bad = []
        for j, lv in self.levels.items():
            r = 2.0 ** j / 16
            for u, z in lv.center_of.items():
                if u != z and not self.metric.d(u, z) < r:
                    bad.append((j, u, z))
            for u, w in lv.A:
                if min(self.klass[u], self.klass[w]) < j:
                    bad.append((j, u, w))
            for a, b in lv.meta:
                if a == b:
                    bad.append((j, a, b))
        return bad

    def meta_path_violations(self, max_pairs: int = 200) -> list[tuple[int, int, int]]:
        """Check d_H(z, z') < (3 l + 1) 2^j for centers at meta-graph hop
        distance l (BFS from every center, up to ``max_pairs`` per scale)."""
        bad = []
        for j, lv in self.levels.items():
            adj: dict[int, set] = {}
            for a, b in lv.meta:
                adj.setdefault(a, set()).add(b)
                adj.setdefault(b, set()).add(a)
            checked = 0
            for z in sorted(adj):
                hops = {z: 0}
                q = deque([z])
                while q:
                    x = q.popleft()
                    for y in adj[x]:
                        if y not in hops:
                            hops[y] = hops[x] + 1
                            q.append(y)
                dH, _, _ = dijkstra(self.H, (z,))
                for y, l in hops.items():
                    if y <= z:
                        continue
                    if not dH.get(y, math.inf) < (3 * l + 1) * 2.0 ** j:
                        bad.append((j, z, y))
                    checked += 1
                if checked >= max_pairs:
                    break
        return bad


def run_spanner(metric: OnlineMetric, pairs, k: int | None = "auto") -> Spanner:
    """Insert ``pairs`` in order, revealing points lazily. ``k='auto'``
    uses the number of pairs (known-k mode)."""
    pairs = list(pairs)
    if k == "auto":
        k = len(pairs)
    sp = Spanner(metric, k)
    for s, t in pairs:
        if metric.capacity > metric.n:
            metric.reveal_until(max(s, t))
        sp.insert_pair(s, t)
    return sp
