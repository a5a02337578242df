import math

import numpy as np
import pytest

from onbab.cables import CableSchedule, cost_under, random_schedule
from onbab.metric import generate
from onbab.mlast import Mlast
from onbab.nonoblivious import NonObliviousBab, run_bab
from onbab.oracles import brute_force_routing_opt, cable_cost_fn

TWO = CableSchedule([(1, 1), (9, 0.1)])


def test_single_terminal(line):
    m = line([0, 1])
    alg = run_bab(m, CableSchedule([(1, 1)]), [0, 1])
    st = alg.steps[0]
    assert st.tau == 1
    assert st.installed[1] == [(1, 0, 1.0)]
    assert alg.plan.paths[1] == [(1, 0, 1)]
    ident = alg.algorithm_cost_identity()
    assert ident["lhs"] == pytest.approx(2) and ident["rhs"] == pytest.approx(2)


def test_root_and_default_type(line):
    alg = NonObliviousBab(line([0, 4]), TWO)
    alg.set_root(0)
    assert alg.tau[0] == math.inf
    tau, probes = alg.assign_type(1)
    assert tau == 1 and all(n == 1 for _, n in probes.values())


def test_ball_count_reaches_threshold(line):
    m = line([0] + [100 + i for i in range(9)])
    alg = run_bab(m, TWO, range(10))
    assert [s.tau for s in alg.steps] == [1] * 8 + [2]
    assert alg.steps[-1].probes[2] == (100.0 + 8, 9)


def test_empty_identity(line):
    alg = NonObliviousBab(line([0, 1]), TWO)
    alg.set_root(0)
    ident = alg.algorithm_cost_identity()
    assert ident["lhs"] == ident["rhs"] == 0


def test_single_cable_is_mlast(plane):
    pts = [(0, 0), (5, 1), (6, 2), (-3, 4), (10, 10), (11, 9)]
    m = plane(pts)
    alg = run_bab(m, CableSchedule([(1, 1)]), range(6))
    ref = Mlast(m)
    ref.insert(0, "sink")
    for v in range(1, 6):
        ref.insert(v, "source")
    assert alg.layers[1].F.keys() == ref.F.keys()
    assert alg.layers[1].A.keys() == ref.A.keys()


def test_close_terminals_against_oracle():
    D = np.array([[0, 1, 1], [1, 0, 0.1], [1, 0.1, 0]]) * 10
    from onbab.metric import OnlineMetric

    m = OnlineMetric.from_matrix(D)
    sch = CableSchedule([(1, 1)])
    alg = run_bab(m, sch, [0, 1, 2])
    assert alg.plan.paths[2][0][:2] == (2, 1)
    alg_cost = cost_under(alg.plan, sch, m.d, alg.installed())
    opt = brute_force_routing_opt(m.matrix(), [1, 2], 0, cable_cost_fn([(1, 1)]))
    assert opt <= alg_cost + 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_invariants_on_random_instances(seed):
    rng = np.random.default_rng(seed)
    sch = random_schedule(rng, 3)
    inst = generate("euclidean", seed=seed, n=40)
    alg = run_bab(inst.online(), sch, range(40))
    assert alg.route_violations() == []
    assert alg.nested_violations() == []
    assert alg.ball_separation_violations() == []
    assert alg.algorithm_cost_identity()["ok"]
    seg = alg.segment_checks()
    assert seg["recursion_violations"] == [] and seg["unrolled_violations"] == []
    for L in alg.layers.values():
        rep = L.lemma6_report()
        assert rep["max_sink_stretch"] <= 3 * (1 + 1e-9) and rep["class_separation_ok"]
