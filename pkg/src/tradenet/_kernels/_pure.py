"""Numpy fallback for the current-flow accumulation kernel.

Vectorizes over chunks of source-target pairs; chunk size is capped so the
per-chunk edge-flow matrix stays small.
"""

import numpy as np
from scipy import sparse

_CHUNK_ELEMENTS = 4_000_000


def accumulate_current_flow(T, edge_i, edge_j, edge_w):
    """Sum each node's per-pair current over all source < target pairs.

    For a pair (s, t), the flow on edge (a, b) is
    ``w_ab * (T[s,a] - T[t,a] - T[s,b] + T[t,b])`` and the current through a
    node is half the sum of absolute flows on its incident edges.  The
    pair's own endpoints contribute nothing (their pairs are excluded from
    the node's tally).

    Parameters
    ----------
    T : (n, n) float array
        Potential matrix (grounded inverse Laplacian, zero-padded);
        ``T[s, v]`` is the potential of node v for source column s.  The
        matrix is symmetric, so callers can pass it either way around.
    edge_i, edge_j : int arrays
        Edge endpoints, ``edge_i < edge_j``.
    edge_w : float array
        Edge weights.

    Returns
    -------
    (n,) float array of accumulated currents (not yet normalized by the
    number of pairs).
    """
    T = np.ascontiguousarray(T, dtype=np.float64)
    edge_i = np.asarray(edge_i, dtype=np.intp)
    edge_j = np.asarray(edge_j, dtype=np.intp)
    edge_w = np.asarray(edge_w, dtype=np.float64)

    n = T.shape[0]
    m = edge_i.size
    out = np.zeros(n)
    if m == 0 or n < 2:
        return out

    incidence = sparse.csr_matrix(
        (
            np.ones(2 * m),
            (np.concatenate([edge_i, edge_j]), np.tile(np.arange(m), 2)),
        ),
        shape=(n, m),
    )
    src, dst = np.triu_indices(n, k=1)
    chunk = max(1, _CHUNK_ELEMENTS // m)
    for lo in range(0, src.size, chunk):
        s = src[lo : lo + chunk]
        t = dst[lo : lo + chunk]
        pot = (T[s] - T[t]).T  # (n, k) potentials per pair
        flow = np.abs(edge_w[:, None] * (pot[edge_i] - pot[edge_j]))  # (m, k)
        current = 0.5 * (incidence @ flow)  # (n, k)
        totals = current.sum(axis=1)
        cols = np.arange(s.size)
        np.subtract.at(totals, s, current[s, cols])
        np.subtract.at(totals, t, current[t, cols])
        out += totals
    return out
