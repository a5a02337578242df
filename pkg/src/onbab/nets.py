"""Hierarchical nets maintained over an arriving point stream.

Level ``j`` holds a set Z_j; a new point v joins Z_j when its distance to
the current Z_j is at least ``factor * 2**j``. Levels range over all of
the integers. Each point stores the level below which it belongs to every
net (``floor``: any level whose radius is at most its distance to every
earlier point) and an explicit set of memberships above it, so no level
window has to be maintained. The first point belongs to every level and
gets class ``math.inf``.
"""
from __future__ import annotations

import math

import numpy as np

from .metric import OnlineMetric, TOL, floor_log2, leq

INF_CLASS = math.inf


class AlreadyInserted(ValueError):
    pass


class LevelOutOfRange(ValueError):
    pass


class NetHierarchy:
    def __init__(self, metric: OnlineMetric, separation_factor: float = 1.0, nesting: bool = False, tol: float = TOL):
        self.metric = metric
        self.factor = float(separation_factor)
        self.nesting = nesting
        self.tol = tol
        self.members: list[int] = []
        self._floor: dict[int, float] = {}
        self._extra: dict[int, set[int]] = {}
        self.klass: dict[int, float] = {}

    def __contains__(self, v: int) -> bool:
        return v in self.klass

    def __len__(self) -> int:
        return len(self.members)

    def radius(self, j: int) -> float:
        return self.factor * 2.0 ** j

    def in_level(self, v: int, j: int) -> bool:
        return j <= self._floor[v] or j in self._extra[v]

    def net_points(self, j: int) -> list[int]:
        lo, hi = self.level_bounds()
        if not lo <= j <= hi:
            raise LevelOutOfRange(f"level {j} outside [{lo}, {hi}]")
        return [v for v in self.members if self.in_level(v, j)]

    def level_bounds(self) -> tuple[int, int]:
        """Queryable levels: floor(log2(min dist / factor)) - 2 up to
        ceil(log2(diam / factor)) + 1. Everything below holds all points,
        everything above holds only the first point."""
        if len(self.members) < 2:
            return (-1, 1)
        pts = self.members
        D = self.metric.matrix()[np.ix_(pts, pts)]
        pos = D[D > 0]
        lo = floor_log2(pos.min() / self.factor) - 2
        hi = math.ceil(math.log2(D.max() / self.factor)) + 1
        return (lo, hi)

    def _place(self, v: int) -> tuple[float, set[int]]:
        if not self.members:
            return INF_CLASS, set()
        row = self.metric.dists(v, self.members)
        dmin = float(row.min())
        first = self.members[0]
        fl = floor_log2(dmin / self.factor)
        if leq(self.radius(fl + 1), dmin, self.tol):
            fl += 1
        top = floor_log2(self.metric.d(v, first) / self.factor) + 1
        extra = set()
        for j in range(fl + 1, top + 1):
            if self.nesting and (j - 1) > fl and (j - 1) not in extra:
                break
            r = self.radius(j)
            far = all(leq(r, row[i], self.tol) for i, u in enumerate(self.members) if self.in_level(u, j))
            if far:
                extra.add(j)
            elif self.nesting:
                break
        return fl, extra

    def whatif_class(self, v: int) -> float:
        if v in self.klass:
            raise AlreadyInserted(f"point {v} already in the hierarchy")
        fl, extra = self._place(v)
        return max(extra) if extra else fl

    def insert(self, v: int) -> float:
        if v in self.klass:
            raise AlreadyInserted(f"point {v} already in the hierarchy")
        fl, extra = self._place(v)
        self.members.append(v)
        self._floor[v] = fl
        self._extra[v] = extra
        self.klass[v] = max(extra) if extra else fl
        return self.klass[v]

    def levels_of(self, v: int, lo: int, hi: int) -> list[int]:
        return [j for j in range(lo, hi + 1) if self.in_level(v, j)]

    def nearest_in_level(self, v: int, j: int) -> tuple[int | None, float]:
        """Nearest member of Z_j (smallest id on ties)."""
        best, bd = None, math.inf
        for u in self.members:
            if u != v and self.in_level(u, j):
                du = self.metric.d(v, u)
                if du < bd:
                    best, bd = u, du
        return best, bd
