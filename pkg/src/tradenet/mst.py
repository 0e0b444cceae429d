"""Minimal spanning trees over the metric distance induced by link weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .network import WeightedNetwork

__all__ = ["SpanningTree", "TreeEdge", "mantegna_distance", "kruskal_mst"]

ROOT2 = float(np.sqrt(2.0))


@dataclass(frozen=True)
class TreeEdge:
    i: int
    j: int
    distance: float
    rescaled_distance: float
    report_weight: float


@dataclass(frozen=True)
class SpanningTree:
    """Kruskal output: a forest with one tree per connected component.

    ``total_distance`` sums the raw (unrescaled) edge distances.  Report
    weights are ``1 - d`` after rescaling tree distances by their maximum,
    so they are again similarity-like values in [0, 1].
    """

    edges: tuple
    total_distance: float
    component_count: int
    rescale_factor: float

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def mantegna_distance(net: WeightedNetwork) -> np.ndarray:
    """Metric distance matrix d = sqrt(2(1-w)), zero on the diagonal.

    Strictly decreasing in the weight: identical partners (w=1) sit at
    distance 0, non-trading pairs (w=0) at sqrt(2).
    """
    w = net.weights
    if np.any(w < 0) or np.any(w > 1):
        raise ValidationError("weights must lie in [0, 1]")
    d = np.sqrt(2.0 * (1.0 - w))
    np.fill_diagonal(d, 0.0)
    return d


class _UnionFind:
    def __init__(self, size):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, node):
        root = node
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[node] != root:
            self.parent[node], node = root, self.parent[node]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def kruskal_mst(
    distances: np.ndarray,
    edge_universe: str = "all_pairs",
    positive_mask: np.ndarray | None = None,
) -> SpanningTree:
    """Minimum spanning forest by ascending-distance edge scan.

    Parameters
    ----------
    distances : (n, n) symmetric array
        Metric distances (e.g. from :func:`mantegna_distance`).
    edge_universe : {"all_pairs", "positive"}
        ``all_pairs`` considers every pair, reproducing a complete tree
        over the transformed matrix; ``positive`` restricts candidates to
        pairs flagged in ``positive_mask`` (typically links with positive
        weight), which can return a forest.
    positive_mask : (n, n) boolean array, required for ``positive``

    Notes
    -----
    Ties are broken by (distance, min endpoint, max endpoint) so output is
    reproducible on inputs with duplicated distances.  Tree distances are
    rescaled by their maximum before the report weights ``1 - d`` are
    computed; the factor is recorded on the result.
    """
    d = np.asarray(distances, dtype=float)
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n:
        raise ValidationError("distance matrix must be square")
    if n < 2:
        raise ValidationError("need at least 2 nodes")

    ii, jj = np.triu_indices(n, k=1)
    if edge_universe == "positive":
        if positive_mask is None:
            raise ValidationError("edge_universe='positive' needs positive_mask")
        keep = positive_mask[ii, jj]
        ii, jj = ii[keep], jj[keep]
    elif edge_universe != "all_pairs":
        raise ValidationError(f"unknown edge_universe {edge_universe!r}")

    dist = d[ii, jj]
    order = np.lexsort((jj, ii, dist))

    uf = _UnionFind(n)
    chosen = []
    for k in order:
        a, b = int(ii[k]), int(jj[k])
        if uf.union(a, b):
            chosen.append((a, b, float(dist[k])))
            if len(chosen) == n - 1:
                break

    component_count = n - len(chosen)
    max_d = max((e[2] for e in chosen), default=0.0)
    scale = max_d if max_d > 0 else 1.0
    edges = tuple(
        TreeEdge(a, b, dd, dd / scale, 1.0 - dd / scale) for a, b, dd in chosen
    )
    return SpanningTree(
        edges=edges,
        total_distance=float(sum(e[2] for e in chosen)),
        component_count=component_count,
        rescale_factor=scale,
    )
