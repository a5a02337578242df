"""Run algorithms on instances, serialise reports, re-check invariants from
a report, and compare against oracles.

Reports are plain JSON with every edge list the checks need, so ``check``
never re-runs the algorithm: it rebuilds the networks from the report and
measures them against the instance metric.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cables import CableSchedule, RoutePlan, cost_under, g, random_schedule
from .graph import EdgeSet, dijkstra, ekey
from .last import STRETCH as LAST_STRETCH, run_last
from .metric import Instance, OnlineMetric, TOL, floor_log2, leq
from .mlast import STRETCH as MLAST_STRETCH, Mlast, pow2
from .nonoblivious import run_bab
from .oblivious import ObliviousBab
from .oracles import (MAX_BRUTE_POINTS, MAX_BRUTE_TERMINALS, MAX_FOREST_PAIRS, MAX_ROB_POINTS, MAX_ROB_TERMINALS,
                      MAX_STEINER_TERMINALS, TooLarge, brute_force_routing_opt, cable_cost_fn, exact_single_sink_rob,
                      exact_steiner, exact_steiner_forest, mst_cost, rob_lower_bound)
from .spanner import Spanner, girth

ALGORITHMS = ("last", "mlast", "spanner", "bab", "obl-rand", "obl-det", "obl-det2")
OBL_VARIANT = {"obl-rand": "rand", "obl-det": "det", "obl-det2": "det-improved"}


class UnknownAlgorithm(ValueError):
    pass


class InstanceRoleMismatch(ValueError):
    pass


class TooLargeForOracle(ValueError):
    pass


def _num(x):
    """JSON-safe number: infinity becomes the string "inf"."""
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def _unnum(x):
    return math.inf if x == "inf" else x


def _edges(es) -> list:
    return es.to_list() if isinstance(es, EdgeSet) else sorted([min(a, b), max(a, b), w] for a, b, w in es)


def digest(instance: Instance) -> str:
    return hashlib.sha256(instance.to_json().encode()).hexdigest()[:16]


def load_schedule(instance: Instance, cables=None, seed: int = 0) -> CableSchedule:
    if cables:
        return CableSchedule(cables)
    if instance.cables:
        return CableSchedule(instance.cables)
    return random_schedule(np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# role handling


def single_sink_order(instance: Instance) -> list[int]:
    arr = instance.arrivals
    if not arr or arr[0].role != "sink":
        raise InstanceRoleMismatch("single-sink algorithms need a sink arriving first")
    bad = [a.id for a in arr[1:] if a.role not in ("terminal", "source")]
    if bad:
        raise InstanceRoleMismatch(f"points {bad[:5]} are not terminals")
    return [a.id for a in arr]


def mlast_stream(instance: Instance) -> list[tuple[int, str]]:
    arr = instance.arrivals
    if not arr or arr[0].role != "sink":
        raise InstanceRoleMismatch("mlast needs a sink arriving first")
    out = []
    for a in arr:
        if a.role == "pair":
            raise InstanceRoleMismatch("mlast cannot run on pair arrivals")
        out.append((a.id, "sink" if a.role == "sink" else "source"))
    return out


def pair_list(instance: Instance) -> list[tuple[int, int]]:
    pairs = instance.pairs()
    if not pairs:
        raise InstanceRoleMismatch("spanner needs pair arrivals")
    return pairs


# ---------------------------------------------------------------------------
# running


def _reveal(m: OnlineMetric, v: int) -> None:
    if v >= m.n:
        m.reveal_until(v)


def run(instance: Instance, alg: str, seed: int = 0, kmode: str = "known", cables=None) -> tuple[dict, list[dict]]:
    """Returns (report, traces)."""
    if alg not in ALGORITHMS:
        raise UnknownAlgorithm(f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}")
    if kmode not in ("known", "unknown"):
        raise ValueError("kmode must be known or unknown")
    m = instance.online()
    rep = {"algorithm": alg, "instance": digest(instance), "seed": seed, "config": {"kmode": kmode}}
    if alg == "last":
        order = single_sink_order(instance)
        a = run_last(m, order)
        traces = [s.trace() for s in a.steps]
        r = a.stretch_and_cost_report()
        k = len(a.terminals) - 1
        r["c_fit"] = r["cost_H"] / (r["mst_cost"] * max(1.0, math.log2(max(k, 1)))) if r["mst_cost"] else 0.0
        rep.update(root=a.root, terminals=a.terminals, edges={"T": _edges(a.T), "A": _edges(a.A)}, summary=r)
    elif alg == "mlast":
        stream = mlast_stream(instance)
        a = Mlast(m)
        traces = []
        for v, role in stream:
            _reveal(m, v)
            traces.append(a.insert(v, role).trace())
        rep.update(sources=a.sources, sinks=a.sinks, order=a.order,
                   classes={str(v): _num(c) for v, c in a.klass.items()},
                   edges={"F": _edges(a.F), "A": _edges(a.A)}, summary=a.lemma6_report())
    elif alg == "spanner":
        pairs = pair_list(instance)
        k = len(pairs) if kmode == "known" else None
        a = Spanner(m, k)
        traces = []
        for s, t in pairs:
            _reveal(m, max(s, t))
            traces.append(a.insert_pair(s, t).trace())
        st = a.stats()
        st["edges_per_pair"] = st["edge_count"] / len(pairs)
        st["lower_bound"] = a.steiner_forest_lower_bound()
        rep.update(pairs=[list(p) for p in pairs], k=k,
                   levels={str(j): {"centers": sorted(lv.centers), "meta": sorted(list(e) for e in lv.meta)}
                           for j, lv in sorted(a.levels.items())},
                   edges={"H": _edges(a.H)}, summary=st)
    elif alg == "bab":
        order = single_sink_order(instance)
        sch = load_schedule(instance, cables, seed)
        a = run_bab(m, sch, order)
        traces = [s.trace() for s in a.steps]
        ident = a.algorithm_cost_identity()
        lb = max((rob_lower_bound(m, a.terminals, a.root, sch.sigma(i), sch.beta(i - 1)) for i in range(1, sch.M + 1)),
                 default=0.0)
        rep.update(root=a.root, cables=sch.to_json(), tau={str(v): _num(t) for v, t in a.tau.items()},
                   layers={str(i): _edges(list(L.F) + list(L.A)) for i, L in a.layers.items()},
                   routes=a.plan.to_json(),
                   d_at_arrival={str(v): {str(i): x for i, x in D.items()} for v, D in a.d_at_arrival.items()},
                   summary={"cost": ident["lhs"], "accounting_rhs": ident["rhs"], "lower_bound": lb,
                            "ratio_to_lower_bound": ident["lhs"] / lb if lb else 0.0})
    else:
        order = single_sink_order(instance)
        variant = OBL_VARIANT[alg]
        k = len(order) - 1 if kmode == "known" else None
        a = ObliviousBab(m, variant, k, seed)
        _reveal(m, order[0])
        a.set_root(order[0])
        traces = []
        for v in order[1:]:
            _reveal(m, v)
            traces.append(a.insert_terminal(v).trace(variant))
        cr = a.cost_report()
        rep.update(root=a.root, variant=variant, k=k, L=a.L if variant == "det-improved" and k else None,
                   tau={str(v): _num(t) for v, t in a.tau.items()},
                   spanners={str(i): {"members": a.members[i], "edges": _edges(sp.H)} for i, sp in sorted(a.spanners.items())},
                   routes=a.plan.to_json(),
                   probes={str(s.terminal): {"joined": s.joined, "classes": {str(i): c for i, c in s.classes.items()},
                                             "balls": {str(i): b for i, b in s.balls.items()}} for s in a.steps},
                   summary={"cost_report": {str(i): r for i, r in cr.items()},
                            "types": {str(t): c for t, c in sorted(a.type_histogram().items())},
                            "fallbacks": a.fallbacks})
    return rep, traces


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


# ---------------------------------------------------------------------------
# checking


def _full(instance: Instance) -> OnlineMetric:
    m = instance.online()
    if m.n < m.capacity:
        m.reveal_until(m.capacity - 1)
    return m


@dataclass
class CheckResult:
    name: str
    ok: bool
    hard: bool = True
    detail: str = ""

    def line(self) -> str:
        tag = ("PASS" if self.ok else "FAIL") if self.hard else "INFO"
        return f"{self.name}: {tag}" + (f" ({self.detail})" if self.detail else "")


def _graph(m: OnlineMetric, edges) -> EdgeSet:
    """Edges from a report, lengths taken from the metric."""
    return EdgeSet((int(a), int(b), m.d(int(a), int(b))) for a, b, *_ in edges)


def _plan(m: OnlineMetric, root: int, routes: dict) -> RoutePlan:
    p = RoutePlan(root)
    for v, segs in routes.items():
        p.add(int(v), [(int(a), int(b), int(c)) for a, b, c in segs])
    return p


def _first(bad, fmt=str) -> str:
    return f"{len(bad)} violations, first {fmt(bad[0])}" if bad else ""


def _check_last(m, rep, tol):
    r = rep["root"]
    T, A = _graph(m, rep["edges"]["T"]), _graph(m, rep["edges"]["A"])
    dist, _, _ = dijkstra((T, A), (r,))
    bad = [(v, r) for v in rep["terminals"] if v != r and not leq(dist.get(v, math.inf), LAST_STRETCH * m.d(v, r), tol)]
    s = rep["summary"]
    return [CheckResult("stretch<=7", not bad, detail=_first(bad, lambda p: f"pair {p}")),
            CheckResult("c(A)<=2c(T)", leq(A.cost(), 2 * T.cost(), tol), detail=f"c(A)={A.cost():.6g}, c(T)={T.cost():.6g}"),
            CheckResult("cost/MST/log2k", True, False, f"c={s['c_fit']:.4g}")]


def _check_mlast(m, rep, tol):
    G = (_graph(m, rep["edges"]["F"]), _graph(m, rep["edges"]["A"]))
    sinks, sources = rep["sinks"], rep["sources"]
    dist, _, _ = dijkstra(G, sinks)
    bad = []
    for x in sources:
        dxS = m.dists(x, sinks)
        if not leq(dist.get(x, math.inf), MLAST_STRETCH * float(dxS.min()), tol):
            bad.append((x, sinks[int(np.argmin(dxS))]))
    cls = {int(v): _unnum(c) for v, c in rep["classes"].items()}
    order = rep["order"]
    sep = []
    for i, u in enumerate(order):
        for w in order[i + 1:]:
            c = cls[u]
            if c == cls[w] and c != math.inf and not leq(2.0 ** c, m.d(u, w), tol):
                sep.append((u, w))
    pos = {v: i for i, v in enumerate(order)}
    bnd = []
    for u in sources:
        lo = float(m.dists(u, order[: pos[u]]).min()) / 2
        p = pow2(cls[u])
        if not (leq(lo, p, tol) and leq(p, m.d(u, order[0]), tol)):
            bnd.append(u)
    s = rep["summary"]
    return [CheckResult("stretch<=3", not bad, detail=_first(bad, lambda p: f"pair {p}")),
            CheckResult("class-separation", not sep, detail=_first(sep, lambda p: f"pair {p}")),
            CheckResult("class-bound", not bnd, detail=_first(bnd)),
            CheckResult("cost/charge", True, False, f"C={s['C']:.4g}")]


def _check_spanner(m, rep, tol):
    H = _graph(m, rep["edges"]["H"])
    pairs = [tuple(p) for p in rep["pairs"]]
    levels = rep["levels"]
    k = rep["k"]

    def thr(j):
        kk = k if k is not None else len(levels.get(str(j), {}).get("centers", [])) or 1
        return 4 * max(1.0, math.log2(max(kk, 1)))

    bad = []
    for s, t in pairs:
        d, _, _ = dijkstra(H, (s,), targets=(t,))
        if not leq(d.get(t, math.inf), thr(floor_log2(m.d(s, t) * (1 + tol))) * m.d(s, t), tol):
            bad.append((s, t))
    out = [CheckResult("stretch<=4log2k", not bad, detail=_first(bad, lambda p: f"pair {p}"))]
    gbad = []
    for j, lv in levels.items():
        bound = math.log2(k) if k else math.log2(max(len(lv["centers"]), 1))
        gj = girth([tuple(e) for e in lv["meta"]])
        if gj < bound - tol:
            gbad.append((int(j), gj))
    out.append(CheckResult("girth>=log2k", not gbad, hard=k is not None, detail=_first(gbad, lambda p: f"scale {p[0]} girth {p[1]}")))
    s = rep["summary"]
    out.append(CheckResult("edges/k", True, False, f"{len(H) / max(len(pairs), 1):.4g}"))
    lb = s["lower_bound"]
    out.append(CheckResult("cost/lower-bound", True, False, f"{H.cost() / lb:.4g}" if lb else "n/a"))
    return out


def _route_problems(plan: RoutePlan, networks: Callable[[int], EdgeSet]) -> list:
    bad = []
    try:
        plan.validate()
    except Exception as e:  # noqa: BLE001 - report, don't crash
        return [str(e)]
    for v, segs in sorted(plan.paths.items()):
        labels = [c for _, _, c in segs]
        if labels != sorted(labels):
            bad.append(f"terminal {v}: labels not monotone")
        for a, b, c in segs:
            if (a, b) not in networks(c):
                bad.append(f"terminal {v}: edge ({a}, {b}) missing from network {c}")
                break
    return bad


def _check_bab(m, rep, tol):
    sch = CableSchedule.from_json(rep["cables"])
    layers = {int(i): _graph(m, es) for i, es in rep["layers"].items()}
    plan = _plan(m, rep["root"], rep["routes"])
    tau = {int(v): _unnum(t) for v, t in rep["tau"].items()}
    out = []
    rb = _route_problems(plan, lambda c: layers.get(c, EdgeSet()))
    out.append(CheckResult("routes", not rb, detail=_first(rb)))
    installed: dict = {}
    for i, L in layers.items():
        for a, b, _ in L:
            installed.setdefault((a, b), set()).add(i)
    terms = [v for v in plan.paths]
    if terms and not rb:
        lhs = cost_under(plan, sch, m.d, installed)
        rhs = sum(sch.sigma(i) * L.cost() for i, L in layers.items())
        rhs += sum(sch.beta(i) * plan.segment_length(v, i, m.d) for v in terms for i in layers if tau[v] <= i)
    else:
        lhs = rhs = 0.0
    out.append(CheckResult("eq1-accounting", leq(lhs, rhs, tol), detail=f"lhs={lhs:.6g}, rhs={rhs:.6g}"))
    seg = []
    if not rb:
        for v in terms:
            D = {int(i): x for i, x in rep["d_at_arrival"][str(v)].items()}
            before = 0.0
            for i in range(1, sch.M + 1):
                si = plan.segment_length(v, i, m.d)
                if i >= tau[v] and not leq(si, 3 * (D[i + 1] + before), tol):
                    seg.append((v, i))
                before += si
    out.append(CheckResult("segment-recursion", not seg, detail=_first(seg, lambda p: f"terminal {p[0]} cable {p[1]}")))
    s = rep["summary"]
    out.append(CheckResult("cost/lower-bound", True, False, f"{s['ratio_to_lower_bound']:.4g}"))
    return out


def _check_obl(m, rep, tol):
    sp = {int(i): (_graph(m, x["edges"]), set(x["members"])) for i, x in rep["spanners"].items()}
    plan = _plan(m, rep["root"], rep["routes"])
    tau = {int(v): _unnum(t) for v, t in rep["tau"].items()}
    out = []
    rb = _route_problems(plan, lambda c: sp[c][0] if c in sp else EdgeSet())
    out.append(CheckResult("routes", not rb, detail=_first(rb)))
    dec = []
    if not rb and plan.paths:
        top = max(sp, default=0) + 1
        for i in range(0, top + 1):
            cost = cost_under(plan, g(i), m.d)
            buy = 2.0 ** i * sum(G.cost() for j, (G, _) in sp.items() if j >= i)
            rent = sum(plan.prefix_length(v, i, m.d) for v in plan.paths if tau[v] < i)
            if not leq(cost, buy + rent, tol):
                dec.append((i, cost, buy + rent))
    out.append(CheckResult("cost-decomposition", not dec, detail=_first(dec, lambda p: f"i={p[0]}: {p[1]:.6g} > {p[2]:.6g}")))
    variant = rep["variant"]
    if variant == "det-improved":
        cnt: dict = {}
        for i, (_, mem) in sp.items():
            for v in mem:
                if v != rep["root"]:
                    cnt[v] = cnt.get(v, 0) + 1
        if rep["L"]:
            limit = lambda v: rep["L"] + 1  # noqa: E731
        else:
            limit = lambda v: len([i for i in range(1, int(tau[v]) + 1) if i >= tau[v] - math.ceil(math.sqrt(i))])  # noqa: E731
        wb = sorted(v for v, c in cnt.items() if c > limit(v))
        out.append(CheckResult("window", not wb, detail=_first(wb, lambda v: f"terminal {v}")))
    if variant in ("det", "det-improved"):
        cb = []
        for v, pr in rep["probes"].items():
            t = int(tau[int(v)])
            cl = {int(i): c for i, c in pr["classes"].items()}
            bl = {int(i): b for i, b in pr["balls"].items()}
            for i in pr["joined"]:
                if i < t and bl[i] < 2 ** i and not cl[i] < cl[t]:
                    cb.append((int(v), i))
        out.append(CheckResult("class-claim", not cb, detail=_first(cb, lambda p: f"terminal {p[0]} spanner {p[1]}")))
    out.append(CheckResult("types", True, False, json.dumps(rep["summary"]["types"], sort_keys=True)))
    return out


CHECKS = {"last": _check_last, "mlast": _check_mlast, "spanner": _check_spanner, "bab": _check_bab,
          "obl-rand": _check_obl, "obl-det": _check_obl, "obl-det2": _check_obl}


def check(instance: Instance, report: dict, names=None, tol: float = TOL) -> list[CheckResult]:
    alg = report.get("algorithm")
    if alg not in CHECKS:
        raise UnknownAlgorithm(f"report has unknown algorithm {alg!r}")
    m = _full(instance)
    res = CHECKS[alg](m, report, tol)
    if names and names != ["all"]:
        res = [r for r in res if r.name in names]
    return res


# ---------------------------------------------------------------------------
# comparison


def compare_rows(instance: Instance, alg: str, seed: int = 0, kmode: str = "known", cables=None, exact: bool = False) -> list[dict]:
    """ALG/OPT rows (ALG/lower-bound when no exact oracle fits)."""
    if instance.n < 2 or len(instance.arrivals) < 2:
        return []
    rep, _ = run(instance, alg, seed, kmode, cables)
    m = _full(instance)

    def row(label, value, base, kind):
        return {"algorithm": label, "seed": seed, "value": value, "baseline": base, "baseline_kind": kind,
                "ratio": value / base if base else (1.0 if value == 0 else math.inf)}

    def too_large(msg):
        if exact:
            raise TooLargeForOracle(msg)

    s = rep["summary"]
    if alg == "last":
        pts = rep["terminals"]
        if len(pts) <= MAX_STEINER_TERMINALS:
            return [row(alg, s["cost_H"], exact_steiner(m, pts), "steiner")]
        too_large("steiner oracle takes at most 10 terminals")
        return [row(alg, s["cost_H"], mst_cost(m, pts) / 2, "mst/2")]
    if alg == "mlast":
        return [row(alg, s["cost_H"], s["charge_sum"], "class-charge")]
    if alg == "spanner":
        pairs = [tuple(p) for p in rep["pairs"]]
        if len(pairs) <= MAX_FOREST_PAIRS:
            return [row(alg, s["cost_H"], exact_steiner_forest(m, pairs), "steiner-forest")]
        too_large("forest oracle takes at most 5 pairs")
        return [row(alg, s["cost_H"], s["lower_bound"], "ball-packing")]
    terms = [a.id for a in instance.arrivals[1:]]
    root = instance.arrivals[0].id
    if alg == "bab":
        if len(terms) <= MAX_BRUTE_TERMINALS and instance.n <= MAX_BRUTE_POINTS:
            sch = CableSchedule.from_json(rep["cables"])
            fn = cable_cost_fn([(c.sigma, c.beta) for c in sch.cables])
            return [row(alg, s["cost"], brute_force_routing_opt(m, terms, root, fn), "brute-force")]
        too_large("brute force takes at most 4 terminals on 6 points")
        return [row(alg, s["cost"], s["lower_bound"], "rob-lower-bound")]
    rows = []
    fits = len(terms) <= MAX_ROB_TERMINALS and instance.n <= MAX_ROB_POINTS
    if not fits:
        too_large("rent-or-buy oracle takes at most 8 terminals on 12 points")
    for i, r in sorted(s["cost_report"].items(), key=lambda kv: int(kv[0])):
        sig = 2.0 ** int(i)
        if fits:
            base, kind = exact_single_sink_rob(m, terms, root, sig, 1.0)["cost"], "rob"
        else:
            base, kind = rob_lower_bound(m, terms, root, sig, 1.0), "rob-lower-bound"
        rows.append(row(f"{alg}[i={i}]", r["cost"], base, kind))
    return rows


CSV_FIELDS = ("algorithm", "seed", "value", "baseline", "baseline_kind", "ratio")


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (format(v, ".10g") if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
