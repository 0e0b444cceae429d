import numpy as np
import pytest

import naive
from tradenet import _kernels
from tradenet._kernels import accumulate_current_flow_pure


def setup_case(seed, n):
    rng = np.random.default_rng(seed)
    w = naive.random_weighted_graph(rng, n, zero_fraction=0.2)
    lap = np.diag(w.sum(axis=1)) - w
    T = np.zeros((n, n))
    T[1:, 1:] = np.linalg.inv(lap[1:, 1:])
    ei, ej = np.nonzero(np.triu(w, 1))
    return (
        np.ascontiguousarray(T),
        ei.astype(np.intp),
        ej.astype(np.intp),
        np.ascontiguousarray(w[ei, ej]),
    )


def test_backend_reported():
    assert _kernels.BACKEND in ("compiled", "pure")


@pytest.mark.parametrize("seed,n", [(0, 5), (1, 12), (2, 25)])
def test_backends_agree(seed, n):
    args = setup_case(seed, n)
    active = _kernels.accumulate_current_flow(*args)
    pure = accumulate_current_flow_pure(*args)
    np.testing.assert_allclose(active, pure, rtol=1e-12, atol=1e-12)


def test_empty_edges():
    T = np.zeros((4, 4))
    out = accumulate_current_flow_pure(
        T, np.array([], dtype=np.intp), np.array([], dtype=np.intp), np.array([])
    )
    assert np.all(out == 0)


def test_pure_chunking_boundary(monkeypatch):
    import tradenet._kernels._pure as pure_mod

    args = setup_case(3, 10)
    baseline = pure_mod.accumulate_current_flow(*args)
    monkeypatch.setattr(pure_mod, "_CHUNK_ELEMENTS", 7)  # force tiny chunks
    chunked = pure_mod.accumulate_current_flow(*args)
    np.testing.assert_allclose(chunked, baseline, rtol=1e-12)
