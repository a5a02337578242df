"""Cable schedules, cost functions and routing cost accounting.

A cable type (sigma, beta) costs (sigma + beta * x) per unit length for a
load of x. Schedules are pruned so that fixed costs grow by at least 3 and
incremental costs shrink by at least 9 from one kept cable to the next.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .graph import ekey
from .metric import TOL, leq
from .oracles import TreeInstance


class EmptyInput(ValueError):
    pass


class NonMonotone(ValueError):
    pass


class InvalidPlan(ValueError):
    pass


class SandwichFailed(ArithmeticError):
    def __init__(self, x: float, ratio: float):
        super().__init__(f"sandwich fails at x={x} (ratio {ratio:.6g})")
        self.x = x
        self.ratio = ratio


@dataclass(frozen=True)
class CableType:
    sigma: float
    beta: float


@dataclass
class CableSchedule:
    """Cables indexed 1..M; ``beta0`` is the incremental cost of the
    virtual cable 0 (sigma_0 = 0) used by f_1 and the first type threshold."""

    cables: list[CableType]
    beta0: float = 1.0

    def __post_init__(self):
        self.cables = [c if isinstance(c, CableType) else CableType(*map(float, c)) for c in self.cables]
        if not self.cables:
            raise EmptyInput("a schedule needs at least one cable")

    @property
    def M(self) -> int:
        return len(self.cables)

    def sigma(self, i: int) -> float:
        return 0.0 if i == 0 else self.cables[i - 1].sigma

    def beta(self, i: int) -> float:
        return self.beta0 if i == 0 else self.cables[i - 1].beta

    def threshold(self, i: int) -> float:
        """Load at which f_i switches from renting to buying."""
        return self.sigma(i) / self.beta(i - 1)

    def f(self, x: float) -> float:
        return 0.0 if x <= 0 else min(c.sigma + c.beta * x for c in self.cables)

    def f_i(self, i: int, x: float) -> float:
        return min(self.sigma(i), self.beta(i - 1) * x)

    def is_pruned(self, tol: float = TOL) -> bool:
        return all(leq(3 * a.sigma, b.sigma, tol) and leq(b.beta, a.beta / 9, tol)
                   for a, b in zip(self.cables, self.cables[1:]))

    def to_json(self) -> list[dict]:
        return [{"sigma": c.sigma, "beta": c.beta} for c in self.cables]

    @classmethod
    def from_json(cls, obj) -> "CableSchedule":
        return cls([CableType(float(c["sigma"]), float(c["beta"])) for c in obj])


def prune(cables: Sequence, beta0: float = 1.0, tol: float = TOL) -> CableSchedule:
    """Greedy left-to-right scan keeping cable i iff sigma_i >= 3 sigma and
    beta_i <= beta / 9 relative to the last kept cable."""
    cs = [c if isinstance(c, CableType) else CableType(*map(float, c)) for c in cables]
    if not cs:
        raise EmptyInput("no cables given")
    for a, b in zip(cs, cs[1:]):
        if not (b.sigma > a.sigma and b.beta < a.beta):
            raise NonMonotone("sigma must increase and beta decrease along the input")
    if cs[0].beta <= 0 or cs[0].sigma < 0:
        raise NonMonotone("need sigma >= 0 and beta > 0")
    kept = [cs[0]]
    for c in cs[1:]:
        last = kept[-1]
        if leq(3 * last.sigma, c.sigma, tol) and leq(c.beta, last.beta / 9, tol):
            kept.append(c)
    return CableSchedule(kept, beta0)


def random_schedule(rng: np.random.Generator, M: int | None = None) -> CableSchedule:
    """Random pruned schedule: sigma ratios in [3, 12], beta ratios in [9, 30]."""
    M = M or int(rng.integers(1, 5))
    s, b = float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.5, 2.0))
    out = []
    for _ in range(M):
        out.append(CableType(s, b))
        s *= float(rng.uniform(3, 12))
        b /= float(rng.uniform(9, 30))
    return CableSchedule(out)


# ---------------------------------------------------------------------------
# simple cost functions


def g(i: int) -> Callable[[float], float]:
    """Rent-or-buy basis function min(x, 2^i)."""
    cap = 2.0 ** i
    return lambda x: min(float(x), cap)


class ConcaveFn:
    """Piecewise linear function through breakpoints (x, f(x)), starting at
    (0, 0), extended linearly past the last breakpoint."""

    def __init__(self, breakpoints: Iterable[tuple[float, float]], tol: float = TOL):
        pts = sorted((float(x), float(y)) for x, y in breakpoints)
        if not pts or pts[0][0] != 0.0:
            pts = [(0.0, 0.0)] + pts
        if pts[0][1] != 0.0:
            raise ValueError("need f(0) = 0")
        self.x = np.array([p[0] for p in pts])
        self.y = np.array([p[1] for p in pts])
        if len(self.x) < 2:
            raise ValueError("need at least one breakpoint besides the origin")
        slopes = np.diff(self.y) / np.diff(self.x)
        if np.any(slopes < -tol) or np.any(np.diff(slopes) > tol * max(1.0, float(np.abs(slopes).max()))):
            raise ValueError("function must be monotone and concave")
        self.last_slope = float(slopes[-1])

    @classmethod
    def from_callable(cls, f: Callable[[float], float], xs: Iterable[float]) -> "ConcaveFn":
        return cls([(x, f(x)) for x in xs])

    def __call__(self, x: float) -> float:
        if x > self.x[-1]:
            return float(self.y[-1] + self.last_slope * (x - self.x[-1]))
        return float(np.interp(x, self.x, self.y))

    def to_json(self) -> dict:
        return {"breakpoints": [[float(a), float(b)] for a, b in zip(self.x, self.y)]}


def decompose_concave(f: Callable[[float], float], x_max: float, factor: float = 4.0) -> dict[int, float]:
    """Nonnegative c_i with f <= sum_i c_i g_i <= factor * f on [1, x_max].

    sum_i c_i g_i interpolates f at 0, 1, 2, 4, ..., 2^K (K = ceil log2
    x_max); concavity puts it between f/2 and f there, and the whole sum is
    then scaled up by the worst ratio found at the check points.
    """
    K = max(0, math.ceil(math.log2(x_max))) if x_max > 1 else 0
    s = [f(1.0)] + [(f(2.0 ** m) - f(2.0 ** (m - 1))) / 2.0 ** (m - 1) for m in range(1, K + 1)]
    c = {i: s[i] - s[i + 1] for i in range(K)}
    c[K] = s[K]
    c = {i: max(0.0, v) for i, v in c.items() if v > 0}

    def h(x):
        return sum(ci * min(x, 2.0 ** i) for i, ci in c.items())

    xs = _check_points(x_max)
    lam = 1.0
    for x in xs:
        fx, hx = f(x), h(x)
        if fx > 0 and hx <= 0:
            raise SandwichFailed(x, math.inf)
        if hx > 0:
            lam = max(lam, fx / hx)
    c = {i: lam * v for i, v in c.items()}
    for x in xs:
        fx, hx = f(x), lam * h(x)
        if not (leq(fx, hx) and leq(hx, factor * fx)):
            raise SandwichFailed(x, hx / fx if fx else math.inf)
    return c


def _check_points(x_max: float) -> list[float]:
    xs = set(float(x) for x in range(1, int(math.floor(x_max)) + 1))
    p = 1.0
    while p <= x_max:
        xs.add(p)
        p *= 2
    return sorted(xs)


def evaluate_decomposition(c: dict[int, float], x: float) -> float:
    return sum(ci * min(x, 2.0 ** i) for i, ci in c.items())


# ---------------------------------------------------------------------------
# routes


@dataclass
class RoutePlan:
    """Per-terminal paths to the root as ordered (u, w, cable) segments."""

    root: int
    paths: dict[int, list[tuple[int, int, int]]] = field(default_factory=dict)

    def add(self, v: int, segments: list[tuple[int, int, int]]) -> None:
        self.paths[v] = list(segments)

    def validate(self) -> None:
        for v, segs in self.paths.items():
            at = v
            for a, b, _ in segs:
                if a != at:
                    raise InvalidPlan(f"route of {v} breaks at {at} -> ({a}, {b})")
                if a == b:
                    raise InvalidPlan(f"route of {v} has a self-loop at {a}")
                at = b
            if at != self.root:
                raise InvalidPlan(f"route of {v} ends at {at}, not the root {self.root}")

    def edges_of(self, v: int) -> list[tuple[int, int]]:
        return [ekey(a, b) for a, b, _ in self.paths[v]]

    def loads(self) -> dict[tuple[int, int], int]:
        out: dict = {}
        for v in self.paths:
            for e in set(self.edges_of(v)):
                out[e] = out.get(e, 0) + 1
        return out

    def prefix_length(self, v: int, i: int, d) -> float:
        """Length of the longest prefix of P(v) using cables below i."""
        tot = 0.0
        for a, b, c in self.paths[v]:
            if c >= i:
                break
            tot += d(a, b)
        return tot

    def segment_length(self, v: int, i: int, d) -> float:
        """Length of the part of P(v) carried on cable i."""
        return sum(d(a, b) for a, b, c in self.paths[v] if c == i)

    def cable_loads(self, installed: dict | None = None) -> dict[tuple[int, int], dict[int, int]]:
        """load_i(e): demand on e travels on the highest cable installed on e."""
        inst: dict = {}
        for v, segs in self.paths.items():
            for a, b, c in segs:
                inst.setdefault(ekey(a, b), set()).add(c)
        for e, cs in (installed or {}).items():
            inst.setdefault(ekey(*e), set()).update(cs)
        out: dict = {}
        for v in self.paths:
            for e in set(self.edges_of(v)):
                top = max(inst[e])
                out.setdefault(e, {}).setdefault(top, 0)
                out[e][top] += 1
        return out

    def to_json(self) -> dict:
        return {str(v): [list(s) for s in segs] for v, segs in sorted(self.paths.items())}


@dataclass
class CostReport:
    fixed: float
    incremental: float
    per_cable: dict[int, float]
    loads: dict

    @property
    def total(self) -> float:
        return self.fixed + self.incremental


def schedule_cost(plan: RoutePlan, schedule: CableSchedule, d, installed: dict | None = None) -> CostReport:
    fixed = inc = 0.0
    per: dict[int, float] = {}
    loads = plan.cable_loads(installed)
    for (a, b), by in loads.items():
        de = d(a, b)
        for i, x in by.items():
            fx, ix = schedule.sigma(i) * de, schedule.beta(i) * x * de
            fixed += fx
            inc += ix
            per[i] = per.get(i, 0.0) + fx + ix
    return CostReport(fixed, inc, per, loads)


def cost_under(plan: RoutePlan, fn, d, installed: dict | None = None) -> float:
    """Cost of ``plan`` under a cable schedule (highest installed cable per
    edge, loaded cables only) or under any per-edge function of the load."""
    plan.validate()
    if isinstance(fn, CableSchedule):
        return schedule_cost(plan, fn, d, installed).total
    return float(sum(d(a, b) * fn(x) for (a, b), x in plan.loads().items()))


# ---------------------------------------------------------------------------
# per-type optimum on a tree


def tree_opt_i(tree: TreeInstance, schedule: CableSchedule, i: int) -> float:
    """sum_e T(e) min(sigma_i, beta_{i-1} |X(e)|)."""
    X = tree.below()
    return float(sum(w * schedule.f_i(i, X[v]) for v, (_, w) in tree.parent.items()))


def tree_opt_full(tree: TreeInstance, schedule: CableSchedule) -> float:
    """sum_e T(e) min_j (sigma_j + beta_j |X(e)|) over edges carrying demand."""
    X = tree.below()
    return float(sum(w * schedule.f(X[v]) for v, (_, w) in tree.parent.items()))


def per_edge_decomposition_ratio(schedule: CableSchedule, x: float) -> float:
    """sum_i min(sigma_i, beta_{i-1} x) / min_j (sigma_j + beta_j x)."""
    lhs = sum(schedule.f_i(i, x) for i in range(1, schedule.M + 1))
    return lhs / schedule.f(x)


DECOMPOSITION_CONSTANT = 1.5  # sum_{i<=j} sigma_i <= 1.5 sigma_j; sum_{i>j} beta_{i-1} <= 1.125 beta_j
