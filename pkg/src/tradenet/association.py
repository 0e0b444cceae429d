"""Correlation structure, ranking comparisons, conditional means, area shares.

These are the cross-network comparisons: how node statistics correlate
within and across the original and residual networks (and with per-capita
GDP), how country rankings move, and how flows relate to size and distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ValidationError
from .network import CountryTable, DirectedFlowMatrix
from .topology import NodeStatistics

__all__ = [
    "CorrelationTable",
    "RankComparison",
    "ConditionalMeanCurve",
    "AreaShares",
    "correlation",
    "correlation_table",
    "rank_comparison",
    "kernel_conditional_mean",
    "area_trade_shares",
]

STAT_NAMES = ("ns", "anns", "wcc", "rwbc")


def correlation(x, y, method: str = "pearson"):
    """Correlation coefficient with its two-sided p-value.

    Pearson uses the t test on n-2 degrees of freedom; Spearman applies the
    same machinery to midrank-transformed data.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("inputs must be 1-d vectors of equal length")
    n = x.size
    if n < 3:
        raise ValidationError("need at least 3 observations")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("inputs must be finite")
    if method == "spearman":
        x = stats.rankdata(x)
        y = stats.rankdata(y)
    elif method != "pearson":
        raise ValidationError(f"unknown method {method!r}")

    xd = x - x.mean()
    yd = y - y.mean()
    sx = np.sqrt(np.dot(xd, xd))
    sy = np.sqrt(np.dot(yd, yd))
    if sx == 0.0 or sy == 0.0:
        raise ValidationError("zero variance input")
    r = float(np.clip(np.dot(xd, yd) / (sx * sy), -1.0, 1.0))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * np.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * stats.t.sf(abs(t), df=n - 2)
    return r, float(p)


@dataclass(frozen=True)
class CorrelationTable:
    """Pairwise Pearson structure over the statistic vectors of two networks.

    Variables are labeled ``<kind>.<stat>`` plus ``pcgdp``; matrices are
    symmetric with unit diagonal.  ``significant`` flags coefficients whose
    p-value is below the significance level (the analogue of the boldface
    marking convention, inverted: True means statistically significant).
    """

    labels: tuple
    coefficients: np.ndarray
    p_values: np.ndarray
    significant: np.ndarray
    alpha: float

    def lookup(self, a: str, b: str):
        ia, ib = self.labels.index(a), self.labels.index(b)
        return (
            float(self.coefficients[ia, ib]),
            float(self.p_values[ia, ib]),
            bool(self.significant[ia, ib]),
        )


def correlation_table(
    stats_w: NodeStatistics,
    stats_e: NodeStatistics,
    pcgdp,
    alpha: float = 0.05,
) -> CorrelationTable:
    """All pairwise correlations among both networks' statistics and pcGDP."""
    pcgdp = np.asarray(pcgdp, dtype=float)
    if not (stats_w.n == stats_e.n == pcgdp.size):
        raise ValidationError("country index mismatch between inputs")

    labels = []
    vectors = []
    for kind, st in (("W", stats_w), ("E", stats_e)):
        cols = st.as_columns()
        for name in STAT_NAMES:
            labels.append(f"{kind}.{name}")
            vectors.append(np.asarray(cols[name], dtype=float))
    labels.append("pcgdp")
    vectors.append(pcgdp)

    k = len(labels)
    coef = np.eye(k)
    pval = np.zeros((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            r, p = correlation(vectors[a], vectors[b])
            coef[a, b] = coef[b, a] = r
            pval[a, b] = pval[b, a] = p
    return CorrelationTable(
        labels=tuple(labels),
        coefficients=coef,
        p_values=pval,
        significant=pval < alpha,
        alpha=alpha,
    )


@dataclass(frozen=True)
class RankComparison:
    """Spearman agreement between two rankings of the same countries.

    ``gainers``/``losers`` list the countries with the largest rank
    improvement resp. deterioration from the first to the second network,
    as (index, rank_before, rank_after) triples.
    """

    statistic: str
    spearman: float
    p_value: float
    gainers: tuple
    losers: tuple


def rank_comparison(
    stats_w: NodeStatistics,
    stats_e: NodeStatistics,
    statistic: str,
    top_k: int = 10,
) -> RankComparison:
    """Compare country rankings under one statistic across two networks.

    Rank 1 is the largest value; midranks resolve ties for the Spearman
    coefficient, while mover lists use ordinal ranks (stable on ties).
    """
    if statistic not in STAT_NAMES and statistic != "nd":
        raise ValidationError(f"unknown statistic {statistic!r}")
    a = np.asarray(stats_w.as_columns()[statistic], dtype=float)
    b = np.asarray(stats_e.as_columns()[statistic], dtype=float)
    if a.size != b.size:
        raise ValidationError("country index mismatch")

    rho, p = correlation(a, b, method="spearman")

    rank_a = stats.rankdata(-a, method="ordinal")
    rank_b = stats.rankdata(-b, method="ordinal")
    move = rank_a.astype(int) - rank_b.astype(int)  # positive: improved in second
    order = np.argsort(-move, kind="stable")
    gainers = tuple(
        (int(i), int(rank_a[i]), int(rank_b[i]))
        for i in order[:top_k]
        if move[i] > 0
    )
    order = np.argsort(move, kind="stable")
    losers = tuple(
        (int(i), int(rank_a[i]), int(rank_b[i]))
        for i in order[:top_k]
        if move[i] < 0
    )
    return RankComparison(
        statistic=statistic,
        spearman=rho,
        p_value=p,
        gainers=gainers,
        losers=losers,
    )


@dataclass(frozen=True)
class ConditionalMeanCurve:
    """Local-linear conditional-mean estimate with pointwise 95% bounds."""

    eval_points: np.ndarray
    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    bandwidth: float
    bandwidth_method: str


def _local_linear(x, y, grid, h):
    """Local-linear estimate, its variance factor, and local residual scale."""
    est = np.empty(grid.size)
    var = np.empty(grid.size)
    for g, x0 in enumerate(grid):
        d = x - x0
        k = np.exp(-0.5 * (d / h) ** 2)
        s0 = k.sum()
        s1 = np.dot(k, d)
        s2 = np.dot(k, d * d)
        denom = s0 * s2 - s1 * s1
        if denom <= 0 or s0 <= 0:
            est[g] = np.nan
            var[g] = np.nan
            continue
        l = k * (s2 - d * s1) / denom  # equivalent-kernel weights, sum to 1
        m = float(np.dot(l, y))
        est[g] = m
        # Local residual variance around the fitted line at x0.
        beta = (s0 * np.dot(k, d * y) - s1 * np.dot(k, y)) / denom
        resid = y - (m + beta * d)
        sigma2 = float(np.dot(k, resid * resid) / s0)
        var[g] = sigma2 * float(np.dot(l, l))
    return est, var


def _loo_cv_score(x, y, h):
    """Leave-one-out squared error of the local-linear smoother at bandwidth h."""
    d = x[None, :] - x[:, None]  # row i: displacements around x_i
    k = np.exp(-0.5 * (d / h) ** 2)
    kd = k * d
    s0 = k.sum(axis=1)
    s1 = kd.sum(axis=1)
    s2 = (kd * d).sum(axis=1)
    denom = s0 * s2 - s1 * s1
    if np.any(denom <= 0):
        return np.inf
    smoother = (k * s2[:, None] - kd * s1[:, None]) / denom[:, None]
    fitted = smoother @ y
    lii = np.diagonal(smoother)
    if np.any(lii >= 1.0):
        return np.inf
    ratio = (y - fitted) / (1.0 - lii)
    return float(np.mean(ratio * ratio))


def kernel_conditional_mean(
    x,
    y,
    eval_points=None,
    bandwidth: float | None = None,
    *,
    n_eval: int = 50,
    cv_grid_size: int = 30,
    cv_max_points: int = 2000,
    seed: int = 0,
) -> ConditionalMeanCurve:
    """Gaussian local-linear regression of y on x with 95% bounds.

    When no bandwidth is given, it is chosen by least-squares leave-one-out
    cross-validation over a ``cv_grid_size``-point log-spaced grid around
    the normal-reference rate; the CV objective is evaluated on at most
    ``cv_max_points`` seeded-subsampled observations to keep the O(n^2)
    scan affordable.  Pointwise bounds use the equivalent-kernel variance
    with a locally estimated residual scale.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("x and y must be 1-d vectors of equal length")
    if x.size < 20:
        raise ValidationError("need at least 20 observations")
    if bandwidth is not None and bandwidth <= 0:
        raise ValidationError("bandwidth must be positive")

    if eval_points is None:
        eval_points = np.linspace(x.min(), x.max(), n_eval)
    else:
        eval_points = np.asarray(eval_points, dtype=float)

    method = "user"
    if bandwidth is None:
        xs, ys = x, y
        if x.size > cv_max_points:
            picks = np.random.default_rng(seed).choice(
                x.size, size=cv_max_points, replace=False
            )
            picks.sort()
            xs, ys = x[picks], y[picks]
        spread = xs.std()
        if spread == 0.0:
            spread = max(abs(xs[0]), 1.0)
        pilot = 1.06 * spread * xs.size ** (-0.2)
        grid = pilot * np.logspace(-1.0, 1.0, cv_grid_size)
        scores = [_loo_cv_score(xs, ys, h) for h in grid]
        bandwidth = float(grid[int(np.argmin(scores))])
        method = f"loocv_grid{cv_grid_size}"

    est, var = _local_linear(x, y, eval_points, float(bandwidth))
    half = 1.959963984540054 * np.sqrt(var)
    return ConditionalMeanCurve(
        eval_points=eval_points,
        estimate=est,
        lower=est - half,
        upper=est + half,
        bandwidth=float(bandwidth),
        bandwidth_method=method,
    )


@dataclass(frozen=True)
class AreaShares:
    """Within/between trade percentages per macro region.

    Row r of ``shares`` holds the percentage of region r countries' total
    trade exchanged with each region (within-region pair trade counts for
    both partners); rows sum to 100.  ``world_share`` is each region's
    percentage of the summed country totals.
    """

    regions: tuple
    shares: np.ndarray
    world_share: np.ndarray


def area_trade_shares(
    flows: DirectedFlowMatrix, countries: CountryTable
) -> AreaShares:
    """Aggregate symmetric trade totals into region-by-region percentages."""
    if flows.n != countries.n:
        raise ValidationError("flow matrix and country table sizes differ")
    unmapped = [
        countries.acronyms[k]
        for k, region in enumerate(countries.region)
        if not str(region).strip()
    ]
    if unmapped:
        raise ValidationError(
            f"countries without a region: {', '.join(unmapped)}"
        )
    regions = sorted(set(countries.region))
    labels = {r: k for k, r in enumerate(regions)}
    membership = np.array([labels[r] for r in countries.region])

    total = flows.values + flows.values.T  # symmetric country-pair totals
    nr = len(regions)
    block = np.zeros((nr, nr))
    for a in range(nr):
        rows = membership == a
        for b in range(nr):
            cols = membership == b
            block[a, b] = total[np.ix_(rows, cols)].sum()
    # Diagonal keeps both orientations of each within pair: that is exactly
    # each country's full trade, so rows measure "total trade of the area".
    row_totals = block.sum(axis=1)
    if np.any(row_totals == 0):
        dead = [regions[k] for k in np.flatnonzero(row_totals == 0)]
        raise ValidationError(f"regions without any trade: {', '.join(dead)}")
    shares = 100.0 * block / row_totals[:, None]
    world = 100.0 * row_totals / row_totals.sum()
    return AreaShares(regions=tuple(regions), shares=shares, world_share=world)
