"""Online metric: points are revealed one at a time together with their
distances to every point revealed before them.

Instances (a full matrix staged up front, an arrival sequence and an
optional cable list) are generated here as well, and serialised to the JSON
instance format used by the command line harness.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TOL = float(os.environ.get("ONBAB_TOL", "1e-9"))

ROLES = ("sink", "source", "terminal", "pair")


class MetricError(ValueError):
    pass


class TriangleViolation(MetricError):
    """d(u, w) > d(u, v) + d(v, w) beyond the relative tolerance."""

    def __init__(self, u: int, v: int, w: int):
        super().__init__(f"triangle inequality violated on ({u}, {v}, {w})")
        self.triple = (u, v, w)


class NegativeDistance(MetricError):
    pass


class CoincidentPoints(MetricError):
    pass


class AllZeroDistances(MetricError):
    pass


class UnrevealedPoint(MetricError):
    """Raised when an algorithm queries a point that has not arrived yet."""


class BadParams(MetricError):
    pass


def floor_log2(x: float) -> int:
    """Exact floor(log2(x)) for x > 0 (no rounding trouble at powers of two)."""
    if x <= 0 or math.isinf(x) or math.isnan(x):
        raise ValueError(f"floor_log2 needs a finite positive value, got {x}")
    _, e = math.frexp(x)
    return e - 1


def leq(a: float, b: float, tol: float = TOL) -> bool:
    """a <= b up to a relative tolerance."""
    if a == math.inf:
        return b == math.inf
    return a <= b + tol * max(abs(a), abs(b))


def gt(a: float, b: float, tol: float = TOL) -> bool:
    """Strict a > b beyond the relative tolerance (negation of ``leq``)."""
    return not leq(a, b, tol)


class OnlineMetric:
    """Append-only metric over points 0..n-1.

    A metric may be *staged* with a full matrix (``OnlineMetric.staged``);
    points then become visible only through :meth:`reveal`, and any query
    touching an unrevealed point raises :class:`UnrevealedPoint`.
    """

    def __init__(self, tol: float = TOL):
        self.tol = tol
        self._D = np.zeros((8, 8))
        self._n = 0
        self._staged: np.ndarray | None = None
        self._scale = 1.0

    # construction -------------------------------------------------------
    @classmethod
    def staged(cls, matrix, tol: float = TOL) -> "OnlineMetric":
        m = cls(tol)
        D = np.array(matrix, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise BadParams("distance matrix must be square")
        m._staged = D
        return m

    @classmethod
    def from_matrix(cls, matrix, tol: float = TOL) -> "OnlineMetric":
        """Stage ``matrix`` and reveal every point (offline use, oracles)."""
        m = cls.staged(matrix, tol)
        while m.n < m.capacity:
            m.reveal()
        return m

    @property
    def n(self) -> int:
        return self._n

    @property
    def capacity(self) -> int:
        return self._n if self._staged is None else self._staged.shape[0]

    def reveal(self) -> int:
        """Reveal the next staged point."""
        if self._staged is None or self._n >= self._staged.shape[0]:
            raise UnrevealedPoint("no staged point left to reveal")
        row = self._staged[self._n, : self._n] / self._scale
        return self._append(row)

    def reveal_until(self, v: int) -> None:
        while self._n <= v:
            self.reveal()

    def reveal_point(self, distances_to_previous: Sequence[float]) -> int:
        if self._staged is not None:
            raise MetricError("metric is staged; use reveal()")
        return self._append(np.asarray(distances_to_previous, dtype=float))

    def _append(self, a: np.ndarray) -> int:
        n = self._n
        if a.shape != (n,):
            raise BadParams(f"expected {n} distances, got {a.shape[0]}")
        if np.any(a < 0) or np.any(np.isnan(a)):
            raise NegativeDistance("distances must be non-negative")
        if n and np.any(a == 0):
            u = int(np.flatnonzero(a == 0)[0])
            raise CoincidentPoints(f"point {n} coincides with point {u}")
        if n >= 2:
            self._check_triangles(a)
        if n >= self._D.shape[0]:
            grown = np.zeros((2 * self._D.shape[0],) * 2)
            grown[:n, :n] = self._D[:n, :n]
            self._D = grown
        self._D[n, :n] = a
        self._D[:n, n] = a
        self._n = n + 1
        return n

    def _check_triangles(self, a: np.ndarray) -> None:
        n = self._n
        D = self._D[:n, :n]
        w = n
        # long side touches the new point: d(u,w) <= d(u,v) + d(v,w)
        slack = a[:, None] - (D + a[None, :])
        bad = slack > self.tol * a[:, None]
        np.fill_diagonal(bad, False)
        if bad.any():
            u, v = map(int, np.argwhere(bad)[0])
            raise TriangleViolation(u, v, w)
        # long side is old: d(u,v) <= d(u,w) + d(w,v)
        bad = D - (a[:, None] + a[None, :]) > self.tol * D
        if bad.any():
            u, v = map(int, np.argwhere(bad)[0])
            raise TriangleViolation(u, w, v)

    # queries -------------------------------------------------------------
    def _guard(self, *pts: int) -> None:
        for p in pts:
            if not 0 <= p < self._n:
                raise UnrevealedPoint(f"point {p} has not been revealed (n={self._n})")

    def d(self, u: int, v: int) -> float:
        self._guard(u, v)
        return float(self._D[u, v])

    def row(self, v: int) -> np.ndarray:
        """Distances from v to all revealed points (read-only view)."""
        self._guard(v)
        r = self._D[v, : self._n]
        r.flags.writeable = False
        return r

    def dists(self, v: int, pts) -> np.ndarray:
        self._guard(v)
        idx = np.asarray(list(pts), dtype=int)
        if idx.size:
            self._guard(int(idx.max()))
        return self._D[v, idx]

    def nearest(self, v: int, pts: Iterable[int]) -> tuple[int | None, float]:
        """Nearest point of ``pts`` to v; ties go to the smallest id."""
        best, bd = None, math.inf
        for p in sorted(pts):
            dp = self.d(v, p)
            if dp < bd:
                best, bd = p, dp
        return best, bd

    def matrix(self) -> np.ndarray:
        return self._D[: self._n, : self._n].copy()

    @property
    def min_positive_distance(self) -> float:
        D = self._D[: self._n, : self._n]
        pos = D[D > 0]
        return float(pos.min()) if pos.size else math.inf

    @property
    def diameter(self) -> float:
        return float(self._D[: self._n, : self._n].max()) if self._n else 0.0

    def normalize(self) -> float:
        """Divide all distances (staged ones too) by the minimum positive
        distance so that every positive distance is at least 1."""
        if self._staged is not None:
            S = self._staged
            pos = S[S > 0]
        else:
            D = self._D[: self._n, : self._n]
            pos = D[D > 0]
        if not pos.size:
            raise AllZeroDistances("no positive distance to normalize by")
        scale = float(pos.min())
        if self._staged is not None:
            scale /= self._scale
            self._scale *= scale
        self._D[: self._n, : self._n] /= scale
        return scale

    def validate(self) -> None:
        """Full O(n^3) triangle check over all revealed triples."""
        D = self.matrix()
        n = D.shape[0]
        for v in range(n):
            bad = D - (D[:, v][:, None] + D[v, :][None, :]) > self.tol * D
            if bad.any():
                u, w = map(int, np.argwhere(bad)[0])
                raise TriangleViolation(u, v, w)


# ---------------------------------------------------------------------------
# instances


@dataclass
class Arrival:
    id: int
    role: str = "terminal"
    mate: int | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise BadParams(f"unknown role {self.role!r}")


@dataclass
class Instance:
    matrix: np.ndarray
    arrivals: list[Arrival]
    cables: list[tuple[float, float]] = field(default_factory=list)
    points: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def online(self, normalize: bool = True) -> OnlineMetric:
        m = OnlineMetric.staged(self.matrix)
        if normalize and self.n > 1:
            m.normalize()
        return m

    def pairs(self) -> list[tuple[int, int]]:
        out, seen = [], set()
        for a in self.arrivals:
            if a.role == "pair" and a.mate is not None and a.id not in seen:
                out.append((a.id, a.mate))
                seen.update((a.id, a.mate))
        return out

    # serialisation --------------------------------------------------------
    def to_json(self) -> str:
        def num(x: float) -> str:
            return format(float(x), ".17g")

        parts = []
        if self.points is not None:
            rows = ", ".join("[" + ", ".join(num(x) for x in p) + "]" for p in self.points)
            parts.append(f'"points": [{rows}]')
        rows = ",\n    ".join("[" + ", ".join(num(x) for x in r) + "]" for r in self.matrix)
        parts.append(f'"matrix": [\n    {rows}\n  ]')
        arr = json.dumps([{"id": a.id, "role": a.role, "mate": a.mate} for a in self.arrivals])
        parts.append(f'"arrivals": {arr}')
        cab = ", ".join(f'{{"sigma": {num(s)}, "beta": {num(b)}}}' for s, b in self.cables)
        parts.append(f'"cables": [{cab}]')
        return "{\n  " + ",\n  ".join(parts) + "\n}\n"

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        obj = json.loads(text)
        pts = None
        if obj.get("points") is not None:
            pts = np.array(obj["points"], dtype=float)
        if obj.get("matrix") is not None:
            D = np.array(obj["matrix"], dtype=float)
        elif pts is not None:
            D = _euclid(pts)
        else:
            raise BadParams("instance needs 'matrix' or 'points'")
        arrivals = [Arrival(a["id"], a.get("role", "terminal"), a.get("mate")) for a in obj.get("arrivals", [])]
        if not arrivals:
            arrivals = default_arrivals(D.shape[0], "single-sink")
        cables = [(float(c["sigma"]), float(c["beta"])) for c in obj.get("cables", [])]
        return cls(D, arrivals, cables, pts)


def _euclid(P: np.ndarray) -> np.ndarray:
    diff = P[:, None, :] - P[None, :, :]
    return np.sqrt((diff ** 2).sum(-1))


def default_arrivals(n: int, roles: str = "single-sink", rng=None, p_sink: float = 0.2) -> list[Arrival]:
    """Arrival sequence in index order.

    ``single-sink``: point 0 is the sink, the rest are terminals.
    ``multi-sink``: point 0 is a sink, the rest are sinks w.p. ``p_sink``.
    ``pairs``: consecutive points (0,1), (2,3), ... are mates.
    """
    if roles == "single-sink":
        return [Arrival(0, "sink")] + [Arrival(i, "terminal") for i in range(1, n)]
    if roles == "multi-sink":
        rng = rng or np.random.default_rng(0)
        out = [Arrival(0, "sink")]
        for i in range(1, n):
            out.append(Arrival(i, "sink" if rng.random() < p_sink else "source"))
        return out
    if roles == "pairs":
        if n % 2:
            raise BadParams("pairs need an even number of points")
        out = []
        for i in range(0, n, 2):
            out += [Arrival(i, "pair", i + 1), Arrival(i + 1, "pair", i)]
        return out
    raise BadParams(f"unknown roles {roles!r}")


def generate(kind: str, seed: int = 0, roles: str = "single-sink", **params) -> Instance:
    """Deterministic test-instance generator.

    kinds: ``euclidean`` (n, dim, side), ``random-metric`` (n, wmin, wmax:
    shortest-path closure of random weights), ``capped-comb`` (n teeth,
    eps, cap; point 0 is the hub at cap/2 from every tooth), ``circle``
    (n points on a circle of given ``radius``, arc distances).
    """
    rng = np.random.default_rng(seed)
    n = int(params.get("n", 0))
    if n < 1:
        raise BadParams("n must be >= 1")
    pts = None
    if kind == "euclidean":
        dim = int(params.get("dim", 2))
        if dim < 1:
            raise BadParams("dim must be >= 1")
        side = float(params.get("side", 100.0))
        pts = rng.uniform(0.0, side, size=(n, dim))
        D = _euclid(pts)
    elif kind == "random-metric":
        lo, hi = float(params.get("wmin", 1.0)), float(params.get("wmax", 10.0))
        if not 0 < lo <= hi:
            raise BadParams("need 0 < wmin <= wmax")
        W = rng.uniform(lo, hi, size=(n, n))
        D = np.minimum(W, W.T)
        np.fill_diagonal(D, 0.0)
        for k in range(n):  # Floyd-Warshall closure
            D = np.minimum(D, D[:, k : k + 1] + D[k : k + 1, :])
    elif kind == "capped-comb":
        eps, cap = float(params.get("eps", 0.1)), float(params.get("cap", 2.0))
        if eps <= 0 or cap <= 0:
            raise BadParams("need eps > 0 and cap > 0")
        idx = np.arange(1, n + 1, dtype=float)
        D = np.zeros((n + 1, n + 1))
        D[1:, 1:] = np.minimum(eps * np.abs(idx[:, None] - idx[None, :]), cap)
        D[0, 1:] = D[1:, 0] = cap / 2
        np.fill_diagonal(D, 0.0)
    elif kind == "circle":
        radius = float(params.get("radius", 10.0))
        if radius <= 0:
            raise BadParams("radius must be positive")
        theta = np.sort(rng.uniform(0, 2 * np.pi, size=n)) if params.get("random", True) else np.linspace(0, 2 * np.pi, n, endpoint=False)
        rng.shuffle(theta)
        gap = np.abs(theta[:, None] - theta[None, :])
        D = radius * np.minimum(gap, 2 * np.pi - gap)
        pts = np.c_[radius * np.cos(theta), radius * np.sin(theta)]
    else:
        raise BadParams(f"unknown kind {kind!r}")
    arrivals = default_arrivals(D.shape[0], roles, rng, float(params.get("p_sink", 0.2)))
    cables = [tuple(map(float, c)) for c in params.get("cables", [])]
    return Instance(D, arrivals, cables, pts)
