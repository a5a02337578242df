import numpy as np
import pytest

from onbab.metric import OnlineMetric


def line_metric(xs):
    """Points on a line at the given coordinates."""
    x = np.asarray(xs, dtype=float)
    return OnlineMetric.from_matrix(np.abs(x[:, None] - x[None, :]))


def plane_metric(pts):
    P = np.asarray(pts, dtype=float)
    return OnlineMetric.from_matrix(np.linalg.norm(P[:, None] - P[None], axis=-1))


@pytest.fixture
def line():
    return line_metric


@pytest.fixture
def plane():
    return plane_metric
