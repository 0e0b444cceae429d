"""Node-statistics battery for symmetric weighted networks.

Degree, strength, average nearest-neighbor strength, binary and weighted
clustering, and random-walk (current-flow) betweenness, all computed on
dense matrices: at a few hundred nodes sparse structures buy nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from ._kernels import accumulate_current_flow
from .errors import TradenetError
from .network import WeightedNetwork

__all__ = [
    "NodeStatistics",
    "node_degree",
    "node_strength",
    "avg_nn_strength",
    "clustering",
    "current_flow_betweenness",
    "rw_betweenness",
    "all_statistics",
]


@dataclass(frozen=True)
class NodeStatistics:
    """Per-node statistic vectors for one network.

    ``anns_undefined`` marks isolated nodes whose ANNS value of 0 is a
    placeholder; ``clustering_undefined`` marks nodes with fewer than two
    partners, whose clustering of 0 is likewise a placeholder.
    ``component_sizes`` records the connected-component structure the
    betweenness computation saw (largest first).
    """

    nd: np.ndarray
    ns: np.ndarray
    anns: np.ndarray
    bcc: np.ndarray
    wcc: np.ndarray
    rwbc: np.ndarray
    network_kind: str
    anns_undefined: np.ndarray
    clustering_undefined: np.ndarray
    component_sizes: tuple

    @property
    def n(self) -> int:
        return self.nd.size

    def as_columns(self) -> dict:
        """Name-to-vector mapping in a fixed serialization order."""
        return {
            "nd": self.nd,
            "ns": self.ns,
            "anns": self.anns,
            "bcc": self.bcc,
            "wcc": self.wcc,
            "rwbc": self.rwbc,
        }


def node_degree(net: WeightedNetwork) -> np.ndarray:
    """Number of partners of each node (adjacency row sums at threshold 0)."""
    return np.count_nonzero(net.weights > 0, axis=1)


def node_strength(net: WeightedNetwork) -> np.ndarray:
    """Sum of each node's link weights."""
    return net.weights.sum(axis=1)


def avg_nn_strength(net: WeightedNetwork) -> np.ndarray:
    """Mean strength of each node's partners; 0 for isolated nodes."""
    a = net.weights > 0
    nd = a.sum(axis=1)
    ns = net.weights.sum(axis=1)
    out = np.zeros(net.n)
    np.divide(a @ ns, nd, out=out, where=nd > 0)
    return out


def clustering(net: WeightedNetwork, mode: str = "weighted") -> np.ndarray:
    """Triangle intensity around each node.

    ``weighted`` cubes the entrywise cube root of the weight matrix and
    reads the diagonal; ``binary`` does the same with the adjacency matrix,
    giving the fraction of closed triangles.  Nodes with fewer than two
    partners get 0 (see ``NodeStatistics.clustering_undefined``).
    """
    if mode == "weighted":
        base = np.cbrt(net.weights)
    elif mode == "binary":
        base = (net.weights > 0).astype(float)
    else:
        raise ValueError(f"unknown clustering mode {mode!r}")
    nd = node_degree(net)
    closed = np.diagonal(np.linalg.matrix_power(base, 3))
    out = np.zeros(net.n)
    ok = nd >= 2
    out[ok] = closed[ok] / (nd[ok] * (nd[ok] - 1))
    return out


def _components(weights: np.ndarray):
    """Connected components of the positive-weight support, largest first."""
    graph = sparse.csr_matrix(weights > 0)
    n_comp, labels = csgraph.connected_components(graph, directed=False)
    sizes = np.bincount(labels, minlength=n_comp)
    order = np.argsort(-sizes, kind="stable")
    return [np.flatnonzero(labels == comp) for comp in order]


def current_flow_betweenness(weights: np.ndarray) -> np.ndarray:
    """Current-flow betweenness of each node of a symmetric weight matrix.

    Unit current is injected and removed at every source-target pair of the
    largest connected component; the node potentials solve the weighted
    Laplacian system, and each node accumulates half the absolute flow on
    its incident edges.  The accumulated flow is averaged over the
    (n-1)(n-2)/2 pairs that do not contain the node itself (n = component
    size), so rescaling all weights by a common positive factor leaves the
    result unchanged.  Nodes outside the largest component get 0.
    """
    weights = np.asarray(weights, dtype=float)
    n = weights.shape[0]
    comps = _components(weights)
    out = np.zeros(n)
    if not comps:
        return out
    nodes = comps[0]
    ncc = nodes.size
    if ncc < 3:
        return out

    w = weights[np.ix_(nodes, nodes)]
    lap = np.diag(w.sum(axis=1)) - w
    # Ground node 0 of the component: invert the reduced Laplacian and pad.
    T = np.zeros((ncc, ncc))
    try:
        T[1:, 1:] = np.linalg.inv(lap[1:, 1:])
    except np.linalg.LinAlgError as exc:
        raise TradenetError(
            "singular Laplacian on a connected component"
        ) from exc

    ei, ej = np.nonzero(np.triu(w, k=1))
    acc = accumulate_current_flow(
        np.ascontiguousarray(T),
        ei.astype(np.intp),
        ej.astype(np.intp),
        np.ascontiguousarray(w[ei, ej]),
    )
    out[nodes] = acc / ((ncc - 1) * (ncc - 2) / 2)
    return out


def rw_betweenness(net: WeightedNetwork) -> np.ndarray:
    """Random-walk betweenness of each node; see current_flow_betweenness."""
    return current_flow_betweenness(net.weights)


def all_statistics(net: WeightedNetwork) -> NodeStatistics:
    """Compute the full statistics battery in one pass."""
    nd = node_degree(net)
    comps = _components(net.weights)
    return NodeStatistics(
        nd=nd,
        ns=node_strength(net),
        anns=avg_nn_strength(net),
        bcc=clustering(net, mode="binary"),
        wcc=clustering(net, mode="weighted"),
        rwbc=rw_betweenness(net),
        network_kind=net.kind,
        anns_undefined=nd == 0,
        clustering_undefined=nd < 2,
        component_sizes=tuple(int(c.size) for c in comps),
    )
