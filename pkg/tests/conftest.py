import itertools
import math

import numpy as np
import pytest

from volmax import _backend
from volmax.geometry import PointSet


@pytest.fixture(params=sorted(_backend.BACKENDS))
def backend(request):
    """Run the test once per available kernel backend."""
    previous = _backend.use(request.param)
    yield request.param
    _backend.use(previous)


def slogvol(vectors):
    """Oracle log-volume: half the log-determinant of the Gram matrix (LU based)."""
    X = np.asarray(vectors, dtype=float)
    if X.shape[0] == 0:
        return 0.0
    sign, logdet = np.linalg.slogdet(X @ X.T)
    return 0.5 * logdet if sign > 0 else -math.inf


def oracle_maxvol(points: PointSet, k: int):
    """Enumerate every k-subset with slogdet; returns (best log-volume, first best subset)."""
    best, arg = -math.inf, None
    for combo in itertools.combinations(range(points.n), k):
        val = slogvol(points.points[list(combo)])
        if val > best + 1e-9:
            best, arg = val, combo
    return best, arg


def oracle_greedy(points: PointSet, k: int):
    """Greedy by literally maximizing slogdet of the grown set at every step."""
    chosen = []
    for _ in range(k):
        scores = [
            (slogvol(points.points[chosen + [j]]), -j)
            for j in range(points.n) if j not in chosen
        ]
        chosen.append(-max(scores)[1])
    return chosen
