import math

import numpy as np
import pytest

from onbab.metric import OnlineMetric, generate
from onbab.mlast import FirstNotSink, Mlast


def test_single_source(line):
    alg = Mlast(line([0, 5]))
    alg.insert(0, "sink")
    st = alg.insert(1, "source")
    assert st.klass == 2
    assert st.f_edge == (1, 0, 5.0)
    assert len(alg.A) == 0
    rep = alg.lemma6_report()
    assert rep["max_sink_stretch"] == 1.0
    assert rep["charge_sum"] == 4
    assert rep["cost_H"] == 5
    assert rep["C"] == pytest.approx(1.25)


def test_new_sink_triggers_augmentation():
    m = OnlineMetric()
    m.reveal_point([])          # s*
    m.reveal_point([8.0])       # u
    m.reveal_point([8.0, 1.0])  # s2
    alg = Mlast(m)
    alg.insert(0, "sink")
    alg.insert(1, "source")
    st = alg.insert(2, "sink")
    assert st.a_edges == [(1, 2, 1.0)]
    assert alg.stretches()[1] == 1.0


def test_sinks_only(line):
    alg = Mlast(line([0, 3]))
    alg.insert(0, "sink")
    alg.insert(1, "sink")
    assert len(alg.F) == len(alg.A) == 0


def test_first_must_be_sink(line):
    with pytest.raises(FirstNotSink):
        Mlast(line([0, 3])).insert(0, "source")


def test_first_class_infinite(line):
    alg = Mlast(line([0, 3]))
    alg.insert(0, "sink")
    assert alg.klass[0] == math.inf


@pytest.mark.parametrize("seed", range(4))
def test_lemma6_checks_on_streams(seed):
    inst = generate("euclidean", seed=seed, n=80, roles="multi-sink")
    m = inst.online()
    alg = Mlast(m)
    for a in inst.arrivals:
        m.reveal_until(a.id)
        alg.insert(a.id, "sink" if a.role == "sink" else "source")
        assert max(alg.stretches().values(), default=1.0) <= 3 * (1 + 1e-9)
    rep = alg.lemma6_report()
    assert rep["class_separation_ok"] and rep["class_bounds_ok"]
    assert rep["f_edges_ok"] and rep["ancestor_chains_ok"] and rep["charging_ok"]
    assert alg.sink_distances() == pytest.approx({v: alg._dist[v] for v in alg.sink_distances()})
