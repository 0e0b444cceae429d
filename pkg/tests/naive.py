"""Independent brute-force implementations used as oracles.

Everything here is written with plain loops and textbook formulas,
deliberately avoiding the vectorized/matrix paths of the package so the
two sides can disagree when one is wrong.
"""

import itertools

import numpy as np


def degree(w):
    n = w.shape[0]
    return np.array(
        [sum(1 for j in range(n) if j != i and w[i, j] > 0) for i in range(n)]
    )


def strength(w):
    n = w.shape[0]
    return np.array([sum(w[i, j] for j in range(n)) for i in range(n)])


def avg_neighbor_strength(w):
    n = w.shape[0]
    ns = strength(w)
    out = np.zeros(n)
    for i in range(n):
        partners = [j for j in range(n) if j != i and w[i, j] > 0]
        if partners:
            out[i] = sum(ns[j] for j in partners) / len(partners)
    return out


def clustering_by_triangles(w, mode):
    """Per-node clustering via exhaustive unordered-triple enumeration."""
    n = w.shape[0]
    nd = degree(w)
    out = np.zeros(n)
    for i in range(n):
        if nd[i] < 2:
            continue
        acc = 0.0
        for j, k in itertools.combinations(range(n), 2):
            if j == i or k == i:
                continue
            if mode == "weighted":
                acc += 2.0 * (w[i, j] * w[j, k] * w[k, i]) ** (1.0 / 3.0)
            else:
                acc += 2.0 * float(w[i, j] > 0 and w[j, k] > 0 and w[k, i] > 0)
        out[i] = acc / (nd[i] * (nd[i] - 1))
    return out


def clustering_by_ordered_paths(w, mode):
    """Same statistic via the ordered two-step path sum."""
    n = w.shape[0]
    nd = degree(w)
    base = np.cbrt(w) if mode == "weighted" else (w > 0).astype(float)
    out = np.zeros(n)
    for i in range(n):
        if nd[i] < 2:
            continue
        acc = 0.0
        for j in range(n):
            for k in range(n):
                acc += base[i, j] * base[j, k] * base[k, i]
        out[i] = acc / (nd[i] * (nd[i] - 1))
    return out


def _components_bfs(w):
    n = w.shape[0]
    unseen = set(range(n))
    comps = []
    while unseen:
        start = min(unseen)
        queue = [start]
        comp = {start}
        unseen.discard(start)
        while queue:
            u = queue.pop()
            for v in list(unseen):
                if w[u, v] > 0:
                    comp.add(v)
                    unseen.discard(v)
                    queue.append(v)
        comps.append(sorted(comp))
    comps.sort(key=len, reverse=True)
    return comps


def current_flow_betweenness(w):
    """Per-pair Laplacian pseudo-inverse solve with explicit current sums.

    Convention: largest connected component only, pairs containing the
    node excluded, normalized by (n-1)(n-2)/2 with n the component size.
    """
    n = w.shape[0]
    out = np.zeros(n)
    comps = _components_bfs(w)
    if not comps or len(comps[0]) < 3:
        return out
    nodes = comps[0]
    ncc = len(nodes)
    sub = w[np.ix_(nodes, nodes)]
    lap = np.diag(sub.sum(axis=1)) - sub
    pinv = np.linalg.pinv(lap)

    acc = np.zeros(ncc)
    for s in range(ncc):
        for t in range(s + 1, ncc):
            rhs = np.zeros(ncc)
            rhs[s], rhs[t] = 1.0, -1.0
            potential = pinv @ rhs
            for i in range(ncc):
                if i == s or i == t:
                    continue
                flow = 0.0
                for j in range(ncc):
                    if sub[i, j] > 0:
                        flow += sub[i, j] * abs(potential[i] - potential[j])
                acc[i] += flow / 2.0
    out[np.array(nodes)] = acc / ((ncc - 1) * (ncc - 2) / 2.0)
    return out


def min_spanning_total(dist):
    """Minimum total distance over every labeled spanning tree.

    Enumerates all n^(n-2) trees through the bijection with integer
    sequences of length n-2, decoded in parallel with numpy.
    """
    n = dist.shape[0]
    if n == 2:
        return float(dist[0, 1])
    seqs = np.array(
        list(itertools.product(range(n), repeat=n - 2)), dtype=np.int64
    )
    count = seqs.shape[0]
    rows = np.arange(count)
    deg = np.ones((count, n), dtype=np.int64)
    for col in range(n - 2):
        np.add.at(deg, (rows, seqs[:, col]), 1)

    total = np.zeros(count)
    for col in range(n - 2):
        j = seqs[:, col]
        leaf = np.argmax(deg == 1, axis=1)
        total += dist[leaf, j]
        deg[rows, leaf] = 0
        deg[rows, j] -= 1
    first = np.argmax(deg == 1, axis=1)
    deg[rows, first] = 0
    second = np.argmax(deg == 1, axis=1)
    total += dist[first, second]
    return float(total.min())


def spherical_law_of_cosines_km(lat1, lon1, lat2, lon2, radius=6371.0):
    """Great-circle distance by the spherical law of cosines (not haversine)."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dl = np.radians(lon2 - lon1)
    c = np.sin(p1) * np.sin(p2) + np.cos(p1) * np.cos(p2) * np.cos(dl)
    return radius * float(np.arccos(np.clip(c, -1.0, 1.0)))


def random_weighted_graph(rng, n, zero_fraction=0.3, normalized=True):
    """Random symmetric weight matrix with zero diagonal; max weight 1 when
    normalized and any edge survives."""
    upper = rng.random((n, n))
    mask = rng.random((n, n)) >= zero_fraction
    w = np.triu(upper * mask, 1)
    w = w + w.T
    if normalized and w.max() > 0:
        w = w / w.max()
    return w
