import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tradenet.network import WeightedNetwork


@pytest.fixture
def triangle():
    """Unit-weight triangle."""
    w = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float)
    return WeightedNetwork(w)


@pytest.fixture
def star4():
    """Star with center 0 and pre-normalization leaf weights 0.2, 0.3, 0.5."""
    w = np.zeros((4, 4))
    for leaf, weight in ((1, 0.2), (2, 0.3), (3, 0.5)):
        w[0, leaf] = w[leaf, 0] = weight
    return WeightedNetwork(w / w.max(), normalizer=float(w.max()))


def make_network(weights, kind="original"):
    w = np.asarray(weights, dtype=float)
    peak = w.max()
    if peak > 0:
        return WeightedNetwork(w / peak, kind=kind, normalizer=float(peak))
    return WeightedNetwork(w, kind=kind, normalizer=0.0, degenerate=True)
