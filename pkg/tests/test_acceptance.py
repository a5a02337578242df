"""Acceptance criteria, one test each. Every test prints a single
``PASS``/``FAIL`` line with the measured numbers, then asserts."""
import math
import time

import numpy as np
import pytest

from onbab.cables import (DECOMPOSITION_CONSTANT, ConcaveFn, decompose_concave, evaluate_decomposition,
                          per_edge_decomposition_ratio, random_schedule)
from onbab.last import run_last
from onbab.metric import OnlineMetric, generate
from onbab.mlast import Mlast
from onbab.nonoblivious import run_bab
from onbab.oblivious import run_oblivious
from onbab.oracles import (brute_force_routing_opt, cable_cost_fn, exact_single_sink_rob, exact_steiner_forest,
                           mst_cost, rob_lower_bound)
from onbab.spanner import run_spanner

TOL = 1e-9


@pytest.fixture
def verdict(capsys):
    def say(num, title, ok, detail, elapsed, budget):
        ok = ok and elapsed < budget
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{num}] {title}: {detail}; {elapsed:.1f}s (budget {budget}s)")
        assert ok, detail
    return say


def test_1_last_hard_guarantees(verdict):
    t0 = time.time()
    worst_stretch, worst_ratio, runs = 0.0, 0.0, []
    comb = OnlineMetric.from_matrix(generate("capped-comb", n=70, eps=0.1, cap=2.0).matrix)
    runs.append(run_last(comb, range(71)))
    for seed in range(100):
        runs.append(run_last(generate("euclidean", seed=seed, n=201).online(), range(201)))
    bad = 0
    for alg in runs:
        s = max(alg.root_stretches().values())
        worst_stretch = max(worst_stretch, s)
        ratio = alg.A.cost() / alg.T.cost()
        worst_ratio = max(worst_ratio, ratio)
        bad += s > 7 * (1 + TOL) or alg.A.cost() > 2 * alg.T.cost() * (1 + TOL)
    verdict(1, "LAST stretch<=7 and c(A)<=2c(T)", bad == 0,
            f"101 instances, max stretch {worst_stretch:.4f}, max c(A)/c(T) {worst_ratio:.4f}, violations {bad}",
            time.time() - t0, 30)


def test_2_last_cost(verdict):
    t0 = time.time()
    c = 0.0
    for seed in range(100):
        alg = run_last(generate("euclidean", seed=seed, n=201).online(), range(201))
        c = max(c, alg.H.cost() / (mst_cost(alg.metric, alg.terminals) * math.log2(200)))
    verdict(2, "LAST c(H)/MST <= c log2 k", c <= 20, f"fitted c = {c:.4f} (tripwire 20)", time.time() - t0, 60)


def test_3_mlast_lemma6(verdict):
    t0 = time.time()
    bad, worst_s, worst_C = [], 0.0, 0.0
    for seed in range(100):
        inst = generate("euclidean", seed=seed, n=150, roles="multi-sink")
        m = inst.online()
        alg = Mlast(m)
        for a in inst.arrivals:
            m.reveal_until(a.id)
            alg.insert(a.id, "sink" if a.role == "sink" else "source")
            s = max(alg.stretches().values(), default=1.0)
            worst_s = max(worst_s, s)
            if s > 3 * (1 + TOL) or alg.class_separation_violations() or alg.class_bound_violations():
                bad.append((seed, a.id))
        rep = alg.lemma6_report()
        worst_C = max(worst_C, rep["C"])
    verdict(3, "MLAST stretch<=3, class separation, class bounds", not bad and worst_C <= 20,
            f"100 streams, checks after every arrival, max stretch {worst_s:.4f}, cost/sum 2^class C = {worst_C:.4f} "
            f"(tripwire 20), violations {len(bad)}", time.time() - t0, 60)


def test_4_spanner(verdict):
    t0 = time.time()
    k = 64
    girth_bad = stretch_bad = unknown_bad = 0
    worst_E, worst_stretch, worst_forest = 0.0, 0.0, 0.0
    min_girth = math.inf
    for seed in range(30):
        inst = generate("euclidean", seed=seed, n=2 * k, roles="pairs")
        sp = run_spanner(inst.online(), inst.pairs())
        g = min(sp.girths().values())
        min_girth = min(min_girth, g)
        girth_bad += g < math.log2(k)
        stretch_bad += bool(sp.stretch_violations())
        worst_stretch = max(worst_stretch, max(sp.pair_stretches()))
        worst_E = max(worst_E, len(sp.H) / k)
        sp2 = run_spanner(inst.online(), inst.pairs(), k=None)
        unknown_bad += bool(sp2.stretch_violations())
    for seed in range(30):
        n_pairs = 2 + seed % 4  # 2..5 pairs
        inst = generate("euclidean", seed=1000 + seed, n=2 * n_pairs, roles="pairs")
        m = inst.online()
        sp = run_spanner(m, inst.pairs())
        opt = exact_steiner_forest(m.matrix(), inst.pairs())
        worst_forest = max(worst_forest, sp.H.cost() / (opt * max(1.0, math.log2(n_pairs))))
    ok = not (girth_bad or stretch_bad or unknown_bad) and worst_E <= 30 and worst_forest <= 30
    verdict(4, "spanner girth, stretch, size, forest cost, unknown k", ok,
            f"k={k}: min girth {min_girth} >= {math.log2(k):.0f} (violations {girth_bad}), max stretch "
            f"{worst_stretch:.3f} <= {4 * math.log2(k):.0f} (violations {stretch_bad}), |E|/k C = {worst_E:.3f} "
            f"(tripwire 30), cost/(OPT log2 k) C = {worst_forest:.3f} (tripwire 30, 2-5 pairs), "
            f"unknown-k stretch violations {unknown_bad}", time.time() - t0, 120)


def test_5_nonoblivious_bab(verdict):
    t0 = time.time()
    worst, rec_bad, unr_bad, eq_bad, cnt = 0.0, 0, 0, 0, 0
    for sched_seed in range(3):
        sch = random_schedule(np.random.default_rng(100 + sched_seed), 3)
        fn = cable_cost_fn([(c.sigma, c.beta) for c in sch.cables])
        for seed in range(50):
            k = 1 + seed % 4
            n = min(6, k + 1 + seed % 2)
            inst = generate("euclidean", seed=seed, n=n)
            m = inst.online()
            alg = run_bab(m, sch, range(k + 1))
            m.reveal_until(n - 1)  # the optimum may route through the extra point
            ident = alg.algorithm_cost_identity()
            opt = brute_force_routing_opt(m.matrix(), list(range(1, k + 1)), 0, fn)
            ratio = ident["lhs"] / opt
            worst = max(worst, ratio)
            seg = alg.segment_checks()
            rec_bad += bool(seg["recursion_violations"])
            unr_bad += bool(seg["unrolled_violations"])
            eq_bad += not ident["ok"]
            cnt += 1
    ok = math.isfinite(worst) and worst <= 50 and not (rec_bad or unr_bad or eq_bad)
    verdict(5, "non-oblivious ALG/OPT, segment recursion, cost accounting", ok,
            f"{cnt} instances, max ALG/OPT {worst:.4f} (tripwire 50), recursion violations {rec_bad}, "
            f"unrolled-form violations {unr_bad}, accounting violations {eq_bad}", time.time() - t0, 120)


def test_6_oblivious_rand(verdict):
    t0 = time.time()
    seeds, k = 30, 64
    dec_bad, types = 0, []
    lb_ratio: dict = {}
    for seed in range(seeds):
        inst = generate("euclidean", seed=seed, n=k + 1)
        m = inst.online()
        alg = run_oblivious(m, range(k + 1), "rand", seed=seed)
        rep = alg.cost_report()
        dec_bad += not all(r["ok"] for r in rep.values())
        types += [alg.tau[v] for v in alg.terminals]
        for i, r in rep.items():
            lb = rob_lower_bound(m, alg.terminals, 0, 2.0 ** i)
            lb_ratio.setdefault(i, []).append(r["cost"] / lb)
    cap = math.ceil(math.log2(k)) + 1
    N = len(types)
    tvals = np.array(types)
    dev = []
    for i in range(1, cap + 1):
        p = 2.0 ** -i if i < cap else 2.0 ** -(cap - 1)
        c = int(np.sum(tvals == i))
        dev.append(abs(c - N * p) / math.sqrt(N * p * (1 - p)))
    # exact optimum on 8-terminal sub-instances
    opt_ratio: dict = {}
    for sub in range(3):
        inst = generate("euclidean", seed=500 + sub, n=9)
        m = inst.online()
        m.reveal_until(8)
        D = m.matrix()
        opt = {}
        for seed in range(seeds):
            alg = run_oblivious(inst.online(), range(9), "rand", seed=seed)
            rep = alg.cost_report()
            dec_bad += not all(r["ok"] for r in rep.values())
            for i, r in rep.items():
                if i not in opt:
                    opt[i] = exact_single_sink_rob(D, range(1, 9), 0, 2.0 ** i, 1.0)["cost"]
                opt_ratio.setdefault(i, []).append(r["cost"] / opt[i])
    mean_opt = {i: float(np.mean(v)) for i, v in sorted(opt_ratio.items())}
    mean_lb = {i: float(np.mean(v)) for i, v in sorted(lb_ratio.items())}
    C = max(v / math.log2(8) ** 2 for v in mean_opt.values())
    ok = dec_bad == 0 and max(dev) <= 3 and all(v >= 1 - TOL and math.isfinite(v) for v in mean_opt.values())
    fmt = lambda d: ", ".join(f"{i}:{v:.2f}" for i, v in d.items())  # noqa: E731
    verdict(6, "oblivious rand decomposition, types, ratios", ok,
            f"decomposition violations {dec_bad}; type deviations (sigma units) max {max(dev):.2f}; "
            f"mean cost_i/OPT_i (k=8) {{{fmt(mean_opt)}}}, C = {C:.3f} against (log2 k)^2; "
            f"mean cost_i/LB_i (k=64) {{{fmt(mean_lb)}}}", time.time() - t0, 180)


def test_7_oblivious_det_improved(verdict):
    t0 = time.time()
    win_bad = claim_bad = 0
    joined_below, max_member, max_type = 0, 0, 0
    cases = [("circle", dict(n=257, radius=10, random=False)), ("circle", dict(n=257, radius=10)),
             ("euclidean", dict(n=257, side=10)), ("capped-comb", dict(n=256, eps=0.01, cap=40.0))]
    for kind, params in cases:
        for seed in range(3):
            inst = generate(kind, seed=seed, **params)
            for k in ("auto", None):
                alg = run_oblivious(inst.online(), range(inst.n), "det-improved", k=k)
                win_bad += len(alg.window_violations())
                claim_bad += len(alg.class_claim_violations())
                max_member = max(max_member, max(alg.membership_counts().values()))
                max_type = max(max_type, max(alg.tau[v] for v in alg.terminals))
                joined_below += sum(1 for s in alg.steps for i in s.joined if i < s.tau and s.balls[i] < 2 ** i)
    verdict(7, "det-improved window and class claim", win_bad == 0 and claim_bad == 0,
            f"24 runs, window violations {win_bad} (max spanners per terminal {max_member}, L+1 = 4), "
            f"class-claim violations {claim_bad} over {joined_below} joined-but-unpaid spanners, max type {max_type}",
            time.time() - t0, 60)


def test_8_oracles_and_decompositions(verdict):
    t0 = time.time()
    worst_gap, cnt = 0.0, 0
    for kind in ("euclidean", "random-metric", "circle"):
        for k in range(1, 5):
            for n in sorted({k + 1, 6} if k < 4 else {5, 6}):
                D = OnlineMetric.from_matrix(generate(kind, seed=10 * k + n, n=n).matrix).matrix()
                X = list(range(1, k + 1))
                for sigma in (0.5, 2.0, 8.0):
                    rob = exact_single_sink_rob(D, X, 0, sigma, 1.0)["cost"]
                    brute = brute_force_routing_opt(D, X, 0, lambda x, s=sigma: min(s, x))
                    worst_gap = max(worst_gap, abs(rob - brute) / brute)
                    cnt += 1
    xs = range(1, 1025)
    worst_l2 = 0.0
    for seed in range(20):
        sch = random_schedule(np.random.default_rng(seed))
        worst_l2 = max(worst_l2, max(per_edge_decomposition_ratio(sch, x) for x in xs))
    worst_l3, l3_bad = 0.0, 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        bx = np.sort(rng.uniform(1, 1024, size=rng.integers(1, 8)))
        slopes = np.sort(rng.uniform(0, 3, size=len(bx)))[::-1]
        ys = np.cumsum(slopes * np.diff(np.r_[0.0, bx]))
        f = ConcaveFn(zip(bx, ys))
        c = decompose_concave(f, 1024)
        for x in xs:
            h = evaluate_decomposition(c, x)
            worst_l3 = max(worst_l3, h / f(x))
            l3_bad += not (f(x) <= h * (1 + TOL) and h <= 4 * f(x) * (1 + TOL))
    ok = worst_gap <= 1e-9 and worst_l2 <= DECOMPOSITION_CONSTANT and l3_bad == 0
    verdict(8, "rent-or-buy oracle = brute force; per-edge decomposition; basis sandwich", ok,
            f"{cnt} oracle pairs, max relative gap {worst_gap:.2e}; per-edge sum f_i / f max {worst_l2:.4f} "
            f"(constant {DECOMPOSITION_CONSTANT}); sandwich max ratio {worst_l3:.4f} <= 4, violations {l3_bad}",
            time.time() - t0, 60)
