"""Undirected weighted edge sets and Dijkstra over unions of them."""
from __future__ import annotations

import heapq
import math
from typing import Iterable, Iterator


def ekey(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u <= v else (v, u)


class EdgeSet:
    """Set of undirected edges with lengths; adding an existing edge is a no-op."""

    def __init__(self, edges: Iterable[tuple[int, int, float]] = ()):
        self.adj: dict[int, dict[int, float]] = {}
        self._w: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            self.add(u, v, w)

    def add(self, u: int, v: int, w: float) -> bool:
        if u == v:
            raise ValueError("self-loops are not edges")
        k = ekey(u, v)
        if k in self._w:
            return False
        self._w[k] = float(w)
        self.adj.setdefault(u, {})[v] = float(w)
        self.adj.setdefault(v, {})[u] = float(w)
        return True

    def add_node(self, u: int) -> None:
        self.adj.setdefault(u, {})

    def remove(self, u: int, v: int) -> None:
        del self._w[ekey(u, v)]
        del self.adj[u][v]
        del self.adj[v][u]

    def __contains__(self, e) -> bool:
        return ekey(*e[:2]) in self._w

    def __len__(self) -> int:
        return len(self._w)

    def __iter__(self) -> Iterator[tuple[int, int, float]]:
        for (u, v), w in self._w.items():
            yield u, v, w

    def weight(self, u: int, v: int) -> float:
        return self._w[ekey(u, v)]

    def cost(self) -> float:
        return float(sum(self._w.values()))

    def nodes(self) -> set[int]:
        return set(self.adj)

    def keys(self) -> set[tuple[int, int]]:
        return set(self._w)

    def to_list(self) -> list[list]:
        return [[u, v, w] for (u, v), w in sorted(self._w.items())]

    def copy(self) -> "EdgeSet":
        return EdgeSet(self)


def _neighbors(graphs, u):
    for g in graphs:
        nb = g.adj.get(u)
        if nb:
            yield from nb.items()


def dijkstra(graphs, sources, targets=None, cutoff: float = math.inf, init=None):
    """Multi-source Dijkstra over the union of ``graphs``.

    ``sources`` is an iterable of nodes (distance 0) unless ``init`` gives
    explicit starting labels. Stops at the first settled target when
    ``targets`` is given. Returns ``(dist, pred, hit)`` where ``hit`` is
    the settled target (or None). Ties settle the smaller node id first.
    """
    if isinstance(graphs, EdgeSet):
        graphs = (graphs,)
    targets = set(targets) if targets is not None else None
    dist: dict[int, float] = {}
    pred: dict[int, int | None] = {}
    heap = []
    start = init if init is not None else {s: 0.0 for s in sources}
    for s, d0 in start.items():
        heap.append((d0, s, None))
    heapq.heapify(heap)
    while heap:
        d, u, p = heapq.heappop(heap)
        if u in dist:
            continue
        if d > cutoff:
            break
        dist[u] = d
        pred[u] = p
        if targets is not None and u in targets:
            return dist, pred, u
        for v, w in _neighbors(graphs, u):
            if v not in dist:
                heapq.heappush(heap, (d + w, v, u))
    return dist, pred, None


def path_to(pred: dict, t: int) -> list[int]:
    """Node sequence from the Dijkstra source to ``t`` (source first)."""
    out = [t]
    while pred[out[-1]] is not None:
        out.append(pred[out[-1]])
    return out[::-1]


def shortest_path(graphs, s: int, targets, cutoff: float = math.inf):
    """``(length, nodes)`` of a shortest path from s to the nearest target,
    or ``(inf, None)`` if none is reachable."""
    if isinstance(targets, int):
        targets = (targets,)
    dist, pred, hit = dijkstra(graphs, (s,), targets, cutoff)
    if hit is None:
        return math.inf, None
    return dist[hit], path_to(pred, hit)


def distance(graphs, s: int, t: int, cutoff: float = math.inf) -> float:
    if s == t:
        return 0.0
    return shortest_path(graphs, s, (t,), cutoff)[0]


def path_length(nodes: list[int], w) -> float:
    return float(sum(w(a, b) for a, b in zip(nodes, nodes[1:])))


def relax_new_edge(graphs, dist: dict, u: int, v: int, w: float) -> list[int]:
    """Update single-source (or multi-source) distances ``dist`` in place
    after edge (u, v, w) joined ``graphs``. Returns the improved nodes."""
    if isinstance(graphs, EdgeSet):
        graphs = (graphs,)
    heap = []
    du, dv = dist.get(u, math.inf), dist.get(v, math.inf)
    if du + w < dv:
        heap.append((du + w, v))
    if dv + w < du:
        heap.append((dv + w, u))
    changed = []
    while heap:
        d, x = heapq.heappop(heap)
        if d >= dist.get(x, math.inf):
            continue
        dist[x] = d
        changed.append(x)
        for y, wy in _neighbors(graphs, x):
            if d + wy < dist.get(y, math.inf):
                heapq.heappush(heap, (d + wy, y))
    return changed
