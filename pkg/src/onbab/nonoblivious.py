"""Deterministic single-sink buy-at-bulk for a known cable schedule.

Each terminal gets a type by counting terminals in a small ball around it;
layer H_i is a multi-sink LAST whose sources are the type-i terminals and
whose sinks are the terminals of higher type (the root among them). Demand
climbs through the layers: from a type-i terminal it follows the shortest
H_i path to the nearest higher-type terminal, on cable i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .cables import CableSchedule, RoutePlan, cost_under
from .graph import dijkstra, path_to
from .metric import OnlineMetric, TOL, leq
from .mlast import Mlast

INF_TYPE = math.inf


class Unreachable(RuntimeError):
    pass


@dataclass
class BabStep:
    terminal: int
    tau: int
    probes: dict
    installed: dict = field(default_factory=dict)
    route: list = field(default_factory=list)

    def trace(self) -> dict:
        return {"terminal": self.terminal, "tau": self.tau,
                "installed": {str(i): [list(e) for e in es] for i, es in sorted(self.installed.items())},
                "route": [list(s) for s in self.route]}


class NonObliviousBab:
    def __init__(self, metric: OnlineMetric, schedule: CableSchedule, tol: float = TOL):
        self.metric = metric
        self.schedule = schedule
        self.tol = tol
        self.root: int | None = None
        self.tau: dict[int, float] = {}
        self.terminals: list[int] = []  # non-root, arrival order
        self.layers: dict[int, Mlast] = {}
        self.plan: RoutePlan | None = None
        self.d_at_arrival: dict[int, dict[int, float]] = {}
        self.steps: list[BabStep] = []

    @property
    def M(self) -> int:
        return self.schedule.M

    def set_root(self, r: int) -> None:
        self.root = r
        self.tau[r] = INF_TYPE
        self.plan = RoutePlan(r)
        for i in range(1, self.M + 1):
            self.layers[i] = Mlast(self.metric, self.tol)
            self.layers[i].insert(r, "sink")

    def X(self, i: int) -> list[int]:
        return [u for u, t in self.tau.items() if t >= i]

    def assign_type(self, v: int) -> tuple[int, dict]:
        """(tau, {i: (d_i, n_i)}) for a newly arrived v (not yet recorded)."""
        probes = {}
        pts = self.terminals + [v]
        tau = 1
        for i in range(1, self.M + 1):
            di = float(self.metric.dists(v, self.X(i)).min())
            radius = di / 8
            ni = int(sum(1 for u in pts if leq(self.metric.d(u, v), radius, self.tol)))
            probes[i] = (di, ni)
            if leq(self.schedule.threshold(i), ni, self.tol):
                tau = max(tau, i)
        return tau, probes

    def insert_terminal(self, v: int) -> BabStep:
        tau, probes = self.assign_type(v)
        self.d_at_arrival[v] = {i: p[0] for i, p in probes.items()}
        self.d_at_arrival[v][self.M + 1] = self.metric.d(v, self.root)
        sinks_before = {i: [u for u in self.X(i + 1)] for i in range(1, self.M + 1)}
        self.tau[v] = tau
        self.terminals.append(v)
        step = BabStep(v, tau, probes)
        for i in range(1, tau + 1):
            st = self.layers[i].insert(v, "source" if i == tau else "sink")
            new = ([st.f_edge] if st.f_edge else []) + list(st.a_edges)
            step.installed[i] = [(a, b, w) for a, b, w in new]
        # route
        segs = []
        w = v
        while w != self.root:
            i = int(self.tau[w])
            H = self.layers[i]
            targets = set(sinks_before[i])
            dist, pred, hit = dijkstra(H.graphs, (w,), targets)
            if hit is None:
                raise Unreachable(f"layer {i}: no higher-type terminal reachable from {w}")
            p = path_to(pred, hit)
            segs += [(a, b, i) for a, b in zip(p, p[1:])]
            w = hit
        self.plan.add(v, segs)
        step.route = segs
        self.steps.append(step)
        return step

    # accounting ---------------------------------------------------------------
    def installed(self) -> dict:
        out: dict = {}
        for i, L in self.layers.items():
            for a, b, _ in list(L.F) + list(L.A):
                out.setdefault((a, b), set()).add(i)
        return out

    def layer_cost(self, i: int) -> float:
        L = self.layers[i]
        return L.F.cost() + L.A.cost()

    def algorithm_cost_identity(self) -> dict:
        d = self.metric.d
        rhs_terms = {}
        for i in range(1, self.M + 1):
            fixed = self.schedule.sigma(i) * self.layer_cost(i)
            inc = sum(self.schedule.beta(i) * self.plan.segment_length(v, i, d)
                      for v in self.terminals if self.tau[v] <= i)
            rhs_terms[i] = (fixed, inc)
        rhs = sum(a + b for a, b in rhs_terms.values())
        lhs = cost_under(self.plan, self.schedule, d, self.installed()) if self.terminals else 0.0
        return {"lhs": lhs, "rhs": rhs, "rhs_terms": rhs_terms, "ok": leq(lhs, rhs, self.tol)}

    def segment_checks(self) -> dict:
        """Per-terminal checks of the segment bounds.

        ``recursion``: d(P_i) <= 3 (d_{i+1} + sum_{i' < i} d(P_i')).
        ``unrolled``: d(P_i) <= sum_{i' <= i} 3^(i - i' + 1) d_{i'+1}.
        Distances d_i are those seen when the terminal arrived.
        """
        d = self.metric.d
        bad_rec, bad_unr, worst = [], [], 0.0
        for v in self.terminals:
            D = self.d_at_arrival[v]
            seg = {i: self.plan.segment_length(v, i, d) for i in range(1, self.M + 1)}
            before = 0.0
            for i in range(1, self.M + 1):
                if i >= self.tau[v]:
                    rec = 3 * (D[i + 1] + before)
                    if not leq(seg[i], rec, self.tol):
                        bad_rec.append((v, i))
                    unr = sum(3 ** (i - j + 1) * D[j + 1] for j in range(1, i + 1))
                    if not leq(seg[i], unr, self.tol):
                        bad_unr.append((v, i))
                    if unr > 0:
                        worst = max(worst, seg[i] / unr)
                before += seg[i]
        return {"recursion_violations": bad_rec, "unrolled_violations": bad_unr, "worst_unrolled_ratio": worst}

    def route_violations(self) -> list[int]:
        """Terminals whose route is not monotone in cable index or misses the root."""
        bad = []
        for v, segs in self.plan.paths.items():
            cs = [c for _, _, c in segs]
            if cs != sorted(cs) or not segs or segs[-1][1] != self.root or segs[0][0] != v:
                bad.append(v)
        return bad

    def ball_separation_violations(self) -> list[tuple[int, int]]:
        """(v, i) with i > tau(v) yet n_i(v) >= sigma_i / beta_{i-1}."""
        return [(s.terminal, i) for s in self.steps for i, (_, n) in s.probes.items()
                if i > s.tau and leq(self.schedule.threshold(i), n, self.tol)]

    def nested_violations(self) -> list[int]:
        bad = []
        for i in range(1, self.M):
            if not set(self.X(i + 1)) <= set(self.X(i)):
                bad.append(i)
        return bad


def run_bab(metric: OnlineMetric, schedule: CableSchedule, order) -> NonObliviousBab:
    order = list(order)
    alg = NonObliviousBab(metric, schedule)
    if metric.capacity > metric.n:
        metric.reveal_until(order[0])
    alg.set_root(order[0])
    for v in order[1:]:
        if metric.capacity > metric.n:
            metric.reveal_until(v)
        alg.insert_terminal(v)
    return alg
