import math

import pytest

from onbab.metric import generate
from onbab.spanner import NotNormalized, Spanner, ZeroDistancePair, girth, run_spanner


def test_first_pair(line):
    sp = Spanner(line([0, 1]), k=2)
    st = sp.insert_pair(0, 1)
    assert st.klass == 0
    assert [sorted(e[:2]) + [e[2]] for e in st.augmentations] == [[0, 1, 1.0]]
    assert st.bridges == []
    assert sp.level(0).centers == [0, 1]


def test_far_pair_gets_its_own_edge(line):
    sp = Spanner(line([0, 1, 10, 11]), k=2)
    sp.insert_pair(0, 1)
    st = sp.insert_pair(2, 3)
    assert len(st.augmentations) == 1
    assert len(sp.H) == 2


def test_pair_already_served(line):
    sp = Spanner(line([0, 1, 2]), k=2)
    sp.insert_pair(0, 1)
    sp.insert_pair(1, 2)
    st = sp.insert_pair(0, 2)
    assert st.augmentations == [] and st.bridges == []


def test_one_pair_stats(line):
    sp = Spanner(line([0, 1]), k=1)
    sp.insert_pair(0, 1)
    s = sp.stats()
    assert s["edge_count"] == 1 and s["max_pair_stretch"] == 1.0
    assert all(v["girth"] == math.inf for v in s["per_scale"].values())


def test_forest_lower_bound(line):
    sp = Spanner(line([0, 1]), k=1)
    assert sp.steiner_forest_lower_bound() == 0
    sp.insert_pair(0, 1)
    assert sp.steiner_forest_lower_bound() == pytest.approx(2 / 32)
    sp = Spanner(line([0, 1, 100, 101]), k=2)
    sp.insert_pair(0, 1)
    sp.insert_pair(2, 3)
    assert sp.steiner_forest_lower_bound() == pytest.approx(4 / 32)


def test_errors(line):
    with pytest.raises(NotNormalized):
        Spanner(line([0, 0.5]), k=1).insert_pair(0, 1)
    with pytest.raises(ZeroDistancePair):
        Spanner(line([0, 1]), k=1).insert_pair(0, 0)


def test_girth_of_small_graphs():
    assert girth([]) == math.inf
    assert girth([(0, 1), (1, 2)]) == math.inf
    assert girth([(0, 1), (0, 1)]) == 2
    assert girth([(0, 1), (1, 2), (2, 0)]) == 3
    assert girth([(0, 1), (1, 2), (2, 3), (3, 0), (0, 4)]) == 4


@pytest.mark.parametrize("kmode", ["known", "unknown"])
@pytest.mark.parametrize("seed", range(3))
def test_random_pairs(seed, kmode):
    inst = generate("euclidean", seed=seed, n=64, roles="pairs")
    sp = run_spanner(inst.online(), inst.pairs(), k="auto" if kmode == "known" else None)
    assert sp.stretch_violations() == []
    assert sp.cluster_violations() == []
    assert sp.meta_path_violations() == []
    if kmode == "known":
        assert min(sp.girths().values()) >= math.log2(32)
    assert len(sp.H) / 32 <= 30


def test_whatif_center_level_is_pure(line):
    sp = Spanner(line([0, 1, 40, 41]), k=2)
    sp.insert_pair(0, 1)
    before = len(sp.H)
    assert sp.whatif_center_level(2, 0) >= 0
    assert len(sp.H) == before and 2 not in sp.klass
