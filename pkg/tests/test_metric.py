import numpy as np
import pytest

from onbab.metric import (TOL, BadParams, CoincidentPoints, Instance, NegativeDistance, OnlineMetric,
                          TriangleViolation, UnrevealedPoint, floor_log2, generate, gt, leq)


def test_reveal_first_points():
    m = OnlineMetric()
    assert m.reveal_point([]) == 0
    assert m.reveal_point([5.0]) == 1
    assert m.d(0, 1) == 5.0


def test_triangle_violation_names_the_triple():
    m = OnlineMetric()
    m.reveal_point([])
    m.reveal_point([5.0])
    with pytest.raises(TriangleViolation) as e:
        m.reveal_point([1.0, 10.0])
    assert "1" in str(e.value) and "2" in str(e.value)


def test_bad_rows_rejected():
    m = OnlineMetric()
    m.reveal_point([])
    with pytest.raises(NegativeDistance):
        m.reveal_point([-1.0])
    with pytest.raises(CoincidentPoints):
        m.reveal_point([0.0])
    with pytest.raises(BadParams):
        m.reveal_point([1.0, 2.0])


def test_unrevealed_point():
    m = OnlineMetric()
    m.reveal_point([])
    with pytest.raises(UnrevealedPoint):
        m.d(0, 3)


@pytest.mark.parametrize("d01, d02, d12, scale", [
    (0.5, 2.0, 2.0, 0.5),
    (1.0, 3.0, 3.0, 1.0),
    (0.25, 0.25, 0.25, 0.25),
])
def test_normalize(d01, d02, d12, scale):
    m = OnlineMetric()
    m.reveal_point([])
    m.reveal_point([d01])
    m.reveal_point([d02, d12])
    assert m.normalize() == pytest.approx(scale)
    assert m.d(0, 1) == pytest.approx(d01 / scale)
    assert m.d(0, 2) == pytest.approx(d02 / scale)


def test_staged_normalize_applies_to_later_points():
    m = OnlineMetric.staged([[0, 0.5, 2], [0.5, 0, 1.5], [2, 1.5, 0]])
    m.normalize()
    m.reveal_until(2)
    assert m.d(0, 2) == pytest.approx(4.0)
    assert m.min_positive_distance == pytest.approx(1.0)


def test_floor_log2_is_exact_on_powers():
    assert floor_log2(1.0) == 0
    assert floor_log2(8.0) == 3
    assert floor_log2(7.999) == 2
    assert floor_log2(0.5) == -1


def test_tolerance_helpers():
    assert leq(1.0 + TOL / 2, 1.0)
    assert not gt(1.0 + TOL / 2, 1.0)
    assert gt(1.001, 1.0)
    assert leq(5.0, float("inf"))
    assert not leq(float("inf"), 5.0)
    assert gt(float("inf"), 5.0)


def test_generate_small_euclidean():
    inst = generate("euclidean", seed=3, n=2, dim=1)
    assert inst.n == 2
    assert inst.matrix[0, 1] > 0


def test_capped_comb_distances():
    inst = generate("capped-comb", n=3, eps=0.1, cap=2.0)
    D = inst.matrix
    assert D[1, 3] == pytest.approx(0.2)
    assert D[1, 0] == pytest.approx(1.0)
    assert D[1, 2] == pytest.approx(0.1)


def test_random_metric_is_deterministic_and_metric():
    a = generate("random-metric", seed=11, n=4)
    b = generate("random-metric", seed=11, n=4)
    assert np.array_equal(a.matrix, b.matrix)
    OnlineMetric.from_matrix(a.matrix).validate()


@pytest.mark.parametrize("kind, params", [
    ("euclidean", {"n": 0}),
    ("euclidean", {"n": 3, "dim": 0}),
    ("capped-comb", {"n": 3, "eps": 0}),
    ("circle", {"n": 3, "radius": -1}),
    ("nope", {"n": 3}),
])
def test_generate_rejects_bad_params(kind, params):
    with pytest.raises(BadParams):
        generate(kind, **params)


def test_instance_json_roundtrip():
    inst = generate("circle", seed=2, n=6, roles="pairs", cables=[(1, 1), (5, 0.1)])
    back = Instance.from_json(inst.to_json())
    assert np.allclose(back.matrix, inst.matrix)
    assert back.pairs() == inst.pairs() == [(0, 1), (2, 3), (4, 5)]
    assert back.cables == [(1.0, 1.0), (5.0, 0.1)]
    assert back.to_json() == inst.to_json()


def test_online_metric_is_normalized():
    m = generate("euclidean", seed=0, n=20).online()
    m.reveal_until(19)
    assert m.min_positive_distance == pytest.approx(1.0)
