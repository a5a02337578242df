"""Exact and lower-bound baselines at desk scale.

Everything here works on the metric closure: a distance matrix, or an
:class:`OnlineMetric` restricted to its revealed points.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .metric import OnlineMetric


class TooLarge(ValueError):
    pass


class NotATree(ValueError):
    pass


MAX_STEINER_TERMINALS = 10
MAX_STEINER_CANDIDATES = 20
MAX_FOREST_PAIRS = 5
MAX_ROB_TERMINALS = 8
MAX_ROB_POINTS = 12
MAX_BRUTE_TERMINALS = 4
MAX_BRUTE_POINTS = 6


def as_matrix(metric) -> np.ndarray:
    if isinstance(metric, OnlineMetric):
        return metric.matrix()
    return np.asarray(metric, dtype=float)


def mst_cost(metric, points: Iterable[int] | None = None) -> float:
    """Prim's algorithm on the complete graph over ``points``."""
    D = as_matrix(metric)
    pts = list(range(D.shape[0])) if points is None else sorted(set(points))
    if len(pts) < 2:
        return 0.0
    S = D[np.ix_(pts, pts)]
    n = len(pts)
    best = S[0].copy()
    done = np.zeros(n, bool)
    done[0] = True
    total = 0.0
    for _ in range(n - 1):
        cand = np.where(done, np.inf, best)
        j = int(cand.argmin())
        total += float(cand[j])
        done[j] = True
        best = np.minimum(best, S[j])
    return total


def greedy_online_steiner(metric, order: Sequence[int]) -> float:
    """Each arrival pays its distance to the nearest earlier arrival."""
    D = as_matrix(metric)
    order = list(order)
    return float(sum(D[v, order[:i]].min() for i, v in enumerate(order) if i))


def exact_steiner(metric, terminals: Iterable[int], candidates: Iterable[int] | None = None) -> float:
    """Dreyfus-Wagner over terminal subsets, vectorised over the node set
    (terminals plus candidate Steiner points)."""
    D = as_matrix(metric)
    T = sorted(set(terminals))
    C = sorted(set(range(D.shape[0])) if candidates is None else set(candidates))
    if len(T) > MAX_STEINER_TERMINALS or len(set(C) - set(T)) > MAX_STEINER_CANDIDATES:
        raise TooLarge(f"{len(T)} terminals / {len(C)} candidates exceed the exact solver")
    if len(T) <= 1:
        return 0.0
    if len(T) == 2:
        return float(D[T[0], T[1]])
    nodes = sorted(set(C) | set(T))
    M = D[np.ix_(nodes, nodes)]
    pos = {v: i for i, v in enumerate(nodes)}
    q = T[-1]
    rest = T[:-1]
    m = len(rest)
    dp = np.full((1 << m, len(nodes)), np.inf)
    for i, t in enumerate(rest):
        dp[1 << i] = M[pos[t]]
    for S in range(1, 1 << m):
        if S & (S - 1) == 0:
            continue
        low = S & -S
        merged = np.full(len(nodes), np.inf)
        sub = (S - 1) & S
        while sub:
            if sub & low:  # each split once
                merged = np.minimum(merged, dp[sub] + dp[S ^ sub])
            sub = (sub - 1) & S
        dp[S] = (merged[:, None] + M).min(axis=0)
    return float(dp[(1 << m) - 1][pos[q]])


def _set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def exact_steiner_forest(metric, pairs: Sequence[tuple[int, int]], candidates: Iterable[int] | None = None) -> float:
    """Optimal Steiner forest: minimum over groupings of the pairs into
    components of the sum of exact Steiner trees."""
    pairs = [tuple(p) for p in pairs]
    if len(pairs) > MAX_FOREST_PAIRS:
        raise TooLarge(f"{len(pairs)} pairs exceed the exact forest solver")
    if not pairs:
        return 0.0
    cand = None if candidates is None else tuple(sorted(set(candidates)))
    D = as_matrix(metric)

    @lru_cache(maxsize=None)
    def tree(group: frozenset) -> float:
        return exact_steiner(D, group, cand)

    best = math.inf
    for part in _set_partitions(list(range(len(pairs)))):
        c = sum(tree(frozenset(v for i in g for v in pairs[i])) for g in part)
        best = min(best, c)
    return best


def exact_single_sink_rob(metric, terminals: Iterable[int], root: int, sigma: float, beta: float,
                          points: Iterable[int] | None = None) -> dict:
    """Single-sink rent-or-buy optimum: pick a bought set B containing the
    root, pay sigma * Steiner(B) plus beta * sum_v d(v, B)."""
    D = as_matrix(metric)
    X = list(terminals)
    pts = sorted(set(range(D.shape[0])) if points is None else set(points) | set(X) | {root})
    if len(X) > MAX_ROB_TERMINALS or len(pts) > MAX_ROB_POINTS:
        raise TooLarge("instance too large for exact rent-or-buy")
    others = [p for p in pts if p != root]
    best, best_B = math.inf, (root,)
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            B = (root,) + extra
            rent = beta * float(D[np.ix_(X, list(B))].min(axis=1).sum()) if X else 0.0
            if rent >= best:
                continue
            c = sigma * exact_steiner(D, B, pts) + rent
            if c < best:
                best, best_B = c, B
    return {"cost": best, "buy_tree": sorted(best_B)}


def cable_cost_fn(cables: Sequence[tuple[float, float]]) -> Callable[[int], float]:
    """Cheapest single cable for a given load: min_i sigma_i + beta_i * x."""
    def f(x):
        return 0.0 if x == 0 else min(s + b * x for s, b in cables)
    return f


def _simple_paths(src: int, dst: int, nodes: list[int]):
    mids = [u for u in nodes if u not in (src, dst)]
    for r in range(len(mids) + 1):
        for perm in itertools.permutations(mids, r):
            yield (src,) + perm + (dst,)


def brute_force_routing_opt(metric, terminals: Sequence[int], root: int, cost, points: Iterable[int] | None = None) -> float:
    """Exact optimum over every choice of one simple path per terminal.

    ``cost`` is a cable list ``[(sigma, beta), ...]`` (best cable per edge
    load) or any callable per-unit-length edge cost of the load.
    """
    D = as_matrix(metric)
    X = list(terminals)
    nodes = sorted(set(range(D.shape[0])) if points is None else set(points) | set(X) | {root})
    if len(X) > MAX_BRUTE_TERMINALS or len(nodes) > MAX_BRUTE_POINTS:
        raise TooLarge("instance too large for brute force")
    if not X:
        return 0.0
    f = cost if callable(cost) else cable_cost_fn(cost)
    edges = list(itertools.combinations(nodes, 2))
    eidx = {e: i for i, e in enumerate(edges)}
    k = len(X)
    # table[e, load] = d(e) * f(load)
    table = np.array([[D[a, b] * f(x) for x in range(k + 1)] for a, b in edges])

    def load_vectors(v):
        rows = []
        for p in _simple_paths(v, root, nodes):
            row = np.zeros(len(edges), np.int8)
            for a, b in zip(p, p[1:]):
                row[eidx[(a, b) if a < b else (b, a)]] += 1
            rows.append(row)
        return np.unique(np.array(rows), axis=0)

    def combine(group):
        L = np.zeros((1, len(edges)), np.int8)
        for v in group:
            P = load_vectors(v)
            L = np.unique((L[:, None, :] + P[None, :, :]).reshape(-1, len(edges)), axis=0)
        return L

    L1 = combine(X[: k // 2])
    L2 = combine(X[k // 2:])
    best = math.inf
    E = np.arange(len(edges))
    for start in range(0, L1.shape[0], 256):
        blk = L1[start:start + 256]
        tot = np.zeros((blk.shape[0], L2.shape[0]))
        for e in E:
            tot += table[e][blk[:, e][:, None] + L2[:, e][None, :]]
        best = min(best, float(tot.min()))
    return best


# ---------------------------------------------------------------------------
# trees for per-type optimum evaluation


@dataclass
class TreeInstance:
    """Rooted tree with edge lengths; ``parent[v] = (u, length)``."""

    root: int
    parent: dict[int, tuple[int, float]]
    terminals: list[int] = field(default_factory=list)

    def __post_init__(self):
        for v in self.parent:
            seen = {v}
            u = v
            while u != self.root:
                if u not in self.parent:
                    raise NotATree(f"node {u} has no path to the root")
                u = self.parent[u][0]
                if u in seen:
                    raise NotATree("cycle in parent map")
                seen.add(u)

    @classmethod
    def from_edges(cls, root: int, edges: Iterable[tuple[int, int, float]], terminals: Iterable[int]) -> "TreeInstance":
        adj: dict[int, list] = {}
        n_edges = 0
        for u, v, w in edges:
            adj.setdefault(u, []).append((v, w))
            adj.setdefault(v, []).append((u, w))
            n_edges += 1
        parent, stack, seen = {}, [root], {root}
        while stack:
            u = stack.pop()
            for v, w in adj.get(u, []):
                if v in seen:
                    continue
                seen.add(v)
                parent[v] = (u, w)
                stack.append(v)
        if len(seen) != len(adj) or n_edges != len(parent):
            raise NotATree("edges do not form a tree spanning their endpoints")
        return cls(root, parent, list(terminals))

    def below(self) -> dict[int, int]:
        """|X(e)| for the edge above each node: terminals in its subtree."""
        cnt = dict.fromkeys(self.parent, 0)
        for t in self.terminals:
            u = t
            while u != self.root:
                cnt[u] += 1
                u = self.parent[u][0]
        return cnt


def tree_from_mst(metric, root: int, terminals: Sequence[int]) -> TreeInstance:
    """MST over root and terminals as a rooted tree."""
    D = as_matrix(metric)
    pts = sorted(set(terminals) | {root})
    n = len(pts)
    S = D[np.ix_(pts, pts)]
    best, via = S[0].copy(), np.zeros(n, int)
    done = np.zeros(n, bool)
    done[0] = True
    edges = []
    for _ in range(n - 1):
        cand = np.where(done, np.inf, best)
        j = int(cand.argmin())
        edges.append((pts[via[j]], pts[j], float(S[via[j], j])))
        done[j] = True
        upd = S[j] < best
        best = np.where(upd, S[j], best)
        via = np.where(upd, j, via)
    return TreeInstance.from_edges(root, edges, terminals)


# ---------------------------------------------------------------------------
# lower bounds


def steiner_lower_bound(metric, points: Iterable[int]) -> float:
    """Half the MST: no Steiner tree on these points is cheaper."""
    return mst_cost(metric, points) / 2


def rob_lower_bound(metric, terminals: Sequence[int], root: int, sigma: float, beta: float = 1.0) -> float:
    """Certified lower bound for per-edge cost min(sigma, beta * load).

    Every used edge costs at least min(sigma, beta) per unit length, and the
    used edges span the terminals and root, giving min(sigma, beta) * MST/2.
    With at most k units per edge, min(sigma, beta * x) >= min(sigma/k, beta) * x,
    and each unit travels at least d(v, r)."""
    X = list(terminals)
    if not X:
        return 0.0
    D = as_matrix(metric)
    mst_half = mst_cost(D, list(X) + [root]) / 2
    k = len(X)
    return max(min(sigma, beta) * mst_half, min(sigma / k, beta) * float(D[X, root].sum()))
