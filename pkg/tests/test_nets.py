import math

import pytest

from onbab.metric import OnlineMetric
from onbab.nets import AlreadyInserted, LevelOutOfRange, NetHierarchy


def test_first_point_has_infinite_class(line):
    h = NetHierarchy(line([0, 5]))
    assert h.insert(0) == math.inf


@pytest.mark.parametrize("gap, klass", [(5, 2), (1, 0), (8, 3), (7.9, 2)])
def test_second_point_class(line, gap, klass):
    h = NetHierarchy(line([0, gap]))
    h.insert(0)
    assert h.insert(1) == klass


def test_whatif_is_pure_and_matches_insert(line):
    h = NetHierarchy(line([0, 5]))
    assert h.whatif_class(0) == math.inf
    h.insert(0)
    assert h.whatif_class(1) == 2
    assert h.whatif_class(1) == 2
    assert len(h) == 1
    assert h.insert(1) == 2
    with pytest.raises(AlreadyInserted):
        h.insert(1)


def test_net_points(line):
    h = NetHierarchy(line([0, 5]))
    h.insert(0)
    assert h.net_points(0) == [0]
    assert h.net_points(1) == [0]
    h.insert(1)
    assert h.net_points(3) == [0]
    assert h.net_points(0) == [0, 1]
    with pytest.raises(LevelOutOfRange):
        h.net_points(40)


def test_packing_at_every_level(line):
    xs = [0, 1, 2.5, 3, 7, 11, 12, 19, 30]
    m = line(xs)
    h = NetHierarchy(m)
    for v in range(len(xs)):
        h.insert(v)
    lo, hi = h.level_bounds()
    for j in range(lo, hi + 1):
        Z = h.net_points(j)
        for a in Z:
            for b in Z:
                if a < b:
                    assert m.d(a, b) >= 2.0 ** j - 1e-9


def test_separation_factor_scales_radius(line):
    h = NetHierarchy(line([0, 5]), separation_factor=1 / 16)
    h.insert(0)
    assert h.insert(1) == 6  # 2^6/16 = 4 <= 5 < 8
