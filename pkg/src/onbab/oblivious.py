"""Oblivious single-sink buy-at-bulk: one routing that is good for every
concave cost at once.

Terminals get types (by coin flips, or deterministically by counting
terminals in a ball whose radius comes from spanner center levels). Type-i
terminals and up are kept in an online spanner F_i, grown in single-sink
mode: each joining terminal is paired with the nearest earlier member (the
root is the first member of every F_i). A terminal's demand then climbs a
ladder of waypoints w_i (nearest member of F_i), keeping only the highest
waypoint in each distance ring [2^j, 2^(j+1)) around it, each hop being a
shortest path in the spanner of the current waypoint's index.

Variants: ``rand`` (random types), ``det`` (ball-counting types) and
``det-improved`` (terminals join only a window of spanners below their type;
the route runs in phases of sqrt(log k) ladder indices).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cables import RoutePlan, cost_under, g
from .graph import shortest_path
from .metric import OnlineMetric, TOL, floor_log2, leq
from .spanner import Spanner

VARIANTS = ("rand", "det", "det-improved")
INF_TYPE = math.inf


class RoutingError(RuntimeError):
    pass


@dataclass
class Hop:
    src: int
    dst: int
    spanner: int
    kind: str  # ring | forced | phase-end
    length: float
    fallback: str | None = None

    def trace(self) -> dict:
        out = {"from": self.src, "to": self.dst, "spanner": self.spanner, "kind": self.kind, "length": self.length}
        if self.fallback:
            out["fallback"] = self.fallback
        return out


@dataclass
class OblStep:
    terminal: int
    tau: int
    ladder: dict
    hops: list = field(default_factory=list)
    classes: dict = field(default_factory=dict)
    balls: dict = field(default_factory=dict)
    joined: list = field(default_factory=list)
    ring_targets: list = field(default_factory=list)

    def trace(self, variant: str) -> dict:
        return {"terminal": self.terminal, "variant": variant, "tau": self.tau,
                "ladder": {str(i): w for i, w in sorted(self.ladder.items())},
                "joined": self.joined, "hops": [h.trace() for h in self.hops]}


class ObliviousBab:
    """``k`` is the number of terminals (known-k mode) or None (unknown-k:
    per-scale spanner thresholds, square phase intervals, growing type cap)."""

    def __init__(self, metric: OnlineMetric, variant: str = "rand", k: int | None = None, seed: int = 0, tol: float = TOL):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        self.metric = metric
        self.variant = variant
        self.k = k
        self.tol = tol
        self.rng = np.random.default_rng(seed)
        self.root: int | None = None
        self.tau: dict[int, float] = {}
        self.terminals: list[int] = []
        self.members: dict[int, list[int]] = {}
        self.spanners: dict[int, Spanner] = {}
        self.plan: RoutePlan | None = None
        self.steps: list[OblStep] = []
        self.fallbacks = 0

    # structure --------------------------------------------------------------
    @property
    def known_k(self) -> bool:
        return self.k is not None

    def cap(self) -> int:
        k = self.k if self.known_k else max(2, len(self.terminals) + 1)
        return math.ceil(math.log2(max(k, 2))) + 1

    @property
    def L(self) -> int:
        return max(1, math.ceil(math.sqrt(math.log2(max(self.k or 2, 2)))))

    def spanner(self, i: int) -> Spanner:
        if i not in self.spanners:
            self.spanners[i] = Spanner(self.metric, self.k if self.known_k else None, self.tol)
            self.members[i] = [self.root]
        return self.spanners[i]

    def set_root(self, r: int) -> None:
        self.root = r
        self.tau[r] = INF_TYPE
        self.plan = RoutePlan(r)

    def window(self, tau: int) -> list[int]:
        if self.variant != "det-improved":
            return list(range(1, tau + 1))
        if self.known_k:
            return list(range(max(1, tau - self.L), tau + 1))
        return [i for i in range(1, tau + 1) if i >= tau - math.ceil(math.sqrt(i))]

    def _partner(self, v: int, i: int) -> int:
        self.spanner(i)
        u, _ = self.metric.nearest(v, self.members[i])
        return u

    # types ------------------------------------------------------------------
    def _random_type(self) -> int:
        return int(min(self.rng.geometric(0.5), self.cap()))

    def _det_type(self, v: int, step: OblStep) -> int:
        pts = self.terminals + [v]
        D = self.metric.dists(v, pts)
        tau = 1
        for i in range(1, self.cap() + 1):
            sp = self.spanner(i)
            c = sp.whatif_center_level(v, self._partner(v, i))
            n = int(np.sum(D <= (2.0 ** c / 8) * (1 + self.tol)))
            step.classes[i], step.balls[i] = c, n
            if n >= 2 ** i:
                tau = i
        return tau

    # arrival ----------------------------------------------------------------
    def insert_terminal(self, v: int) -> OblStep:
        step = OblStep(v, 0, {})
        tau = self._random_type() if self.variant == "rand" else self._det_type(v, step)
        step.tau = tau
        cap = self.cap()
        # waypoints from membership before v joins anything
        for i in range(tau + 1, cap + 1):
            self.spanner(i)
            step.ladder[i] = self.metric.nearest(v, self.members[i])[0]
        step.ladder[cap + 1] = self.root
        for i in self.window(tau):
            sp = self.spanner(i)
            sp.insert_pair(v, self._partner(v, i))
            self.members[i].append(v)
            step.joined.append(i)
        self.tau[v] = tau
        self.terminals.append(v)
        self._route(v, step, cap)
        self.steps.append(step)
        return step

    def _phases(self, tau: int, cap: int):
        top = cap + 1
        if self.variant != "det-improved":
            yield tau, top, top
            return
        if self.known_k:
            L = self.L
            t = tau // L
            while True:
                hi = min((t + 1) * L, top)
                yield t * L, hi, hi
                if hi == top:
                    return
                t += 1
        else:
            t = math.isqrt(tau)
            while True:
                hi = min((t + 1) ** 2, top)
                yield t * t, hi, hi
                if hi == top:
                    return
                t += 1

    def _route(self, v: int, step: OblStep, cap: int) -> None:
        d = self.metric.d
        ladder = step.ladder
        cur_node, cur_idx = v, step.tau
        segs = []
        J = floor_log2(d(v, self.root))
        for lo, hi, target in self._phases(step.tau, cap):
            for j in range(0, J + 1):
                if cur_idx >= target:
                    break
                ring = [i for i, w in ladder.items()
                        if max(lo, cur_idx + 1) <= i <= hi and 2.0 ** j <= d(v, w) * (1 + self.tol) and d(v, w) < 2.0 ** (j + 1)]
                if not ring:
                    continue
                i = max(ring)
                cur_node, cur_idx = self._hop(step, segs, cur_node, cur_idx, ladder[i], i, "ring")
                step.ring_targets.append((i, ladder[i]))
            if cur_idx < target:
                kind = "forced" if target == cap + 1 else "phase-end"
                cur_node, cur_idx = self._hop(step, segs, cur_node, cur_idx, ladder[target], target, kind)
        if cur_node != self.root:
            raise RoutingError(f"route of {v} ended at {cur_node}")
        self.plan.add(v, segs)

    def _path(self, i: int, a: int, b: int):
        length, nodes = shortest_path(self.spanner(i).H, a, (b,))
        if nodes is None:
            raise RoutingError(f"no path {a} -> {b} in F_{i}")
        return length, nodes

    def _hop(self, step, segs, cur, cur_idx, tgt, tgt_idx, kind):
        if tgt == cur:
            return cur, tgt_idx
        mem = set(self.members.get(cur_idx, [self.root]))
        fallback = None
        if cur in mem and tgt in mem:
            pieces = [(cur_idx, cur, tgt)]
        else:
            fallback = "spanner"
            pieces = None
            for m in range(cur_idx, tgt_idx + 1):
                ms = set(self.members.get(m, [self.root]))
                if cur in ms and tgt in ms:
                    pieces = [(m, cur, tgt)]
                    break
            if pieces is None:
                fallback = "two-stage"
                best = None
                common = set(self.members.get(cur_idx, [self.root])) & set(self.members.get(tgt_idx, [self.root]))
                for x in sorted(common):
                    a, _ = shortest_path(self.spanner(cur_idx).H, cur, (x,)) if x != cur else (0.0, [cur])
                    b, _ = shortest_path(self.spanner(tgt_idx).H, x, (tgt,)) if x != tgt else (0.0, [tgt])
                    if best is None or a + b < best[0]:
                        best = (a + b, x)
                x = best[1]
                pieces = [(cur_idx, cur, x), (tgt_idx, x, tgt)]
            self.fallbacks += 1
        total = 0.0
        for m, a, b in pieces:
            if a == b:
                continue
            length, nodes = self._path(m, a, b)
            segs += [(p, q, m) for p, q in zip(nodes, nodes[1:])]
            total += length
        step.hops.append(Hop(cur, tgt, pieces[0][0], kind, total, fallback))
        return tgt, tgt_idx

    # reports ----------------------------------------------------------------
    def spanner_cost(self, i: int) -> float:
        return self.spanners[i].H.cost() if i in self.spanners else 0.0

    def cost_report(self) -> dict:
        d = self.metric.d
        top = max(self.spanners, default=0) + 1
        out = {}
        for i in range(0, top + 1):
            cost = cost_under(self.plan, g(i), d) if self.terminals else 0.0
            buy = 2.0 ** i * sum(self.spanner_cost(m) for m in self.spanners if m >= i)
            rent = sum(self.plan.prefix_length(v, i, d) for v in self.terminals if self.tau[v] < i)
            out[i] = {"cost": cost, "buy": buy, "rent": rent, "ok": leq(cost, buy + rent, self.tol)}
        return out

    def membership_counts(self) -> dict[int, int]:
        cnt = dict.fromkeys(self.terminals, 0)
        for i, ms in self.members.items():
            for v in ms:
                if v != self.root:
                    cnt[v] += 1
        return cnt

    def window_violations(self) -> list[int]:
        """Terminals in more spanners than their window allows."""
        bad = []
        cnt = self.membership_counts()
        for s in self.steps:
            limit = len(self.window(s.tau)) if self.variant != "det-improved" or not self.known_k else self.L + 1
            if cnt[s.terminal] > limit:
                bad.append(s.terminal)
        return bad

    def class_claim_violations(self) -> list[tuple[int, int]]:
        """(v, i') with i' a joined spanner below tau where v could not pay
        (|B_i'| < 2^i') yet class_i'(v) >= class_tau(v)."""
        bad = []
        for s in self.steps:
            if not s.classes:
                continue
            for i in s.joined:
                if i < s.tau and s.balls[i] < 2 ** i and not s.classes[i] < s.classes[s.tau]:
                    bad.append((s.terminal, i))
        return bad

    def bypass_violations(self) -> list[int]:
        """Terminals whose ring-chosen waypoints w_1..w_m break
        sum_{l<m} d(v, w_l) <= 2 d(v, w_m) (checked per phase for the
        improved variant, where rings restart)."""
        bad = []
        d = self.metric.d
        for s in self.steps:
            groups = [s.ring_targets]
            if self.variant == "det-improved":
                groups = []
                for lo, hi, _ in self._phases(s.tau, max(s.ladder) - 1):
                    groups.append([t for t in s.ring_targets if lo <= t[0] <= hi])
            for grp in groups:
                if len(grp) < 2:
                    continue
                dist = [d(s.terminal, w) for _, w in grp]
                if not leq(sum(dist[:-1]), 2 * dist[-1], self.tol):
                    bad.append(s.terminal)
        return bad

    def type_histogram(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in self.steps:
            out[s.tau] = out.get(s.tau, 0) + 1
        return out


def run_oblivious(metric: OnlineMetric, order, variant: str = "rand", k: int | None = "auto", seed: int = 0) -> ObliviousBab:
    order = list(order)
    if k == "auto":
        k = len(order) - 1
    alg = ObliviousBab(metric, variant, k, seed)
    if metric.capacity > metric.n:
        metric.reveal_until(order[0])
    alg.set_root(order[0])
    for v in order[1:]:
        if metric.capacity > metric.n:
            metric.reveal_until(v)
        alg.insert_terminal(v)
    return alg
