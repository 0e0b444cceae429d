"""Rank-size series and tail-distribution fits.

Power-law fitting deliberately uses the rank-size OLS convention (log value
on log rank) rather than a tail MLE; a Hill estimator is available as a
labeled alternative for robustness checks, never as the default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ValidationError

__all__ = [
    "RankSizeFit",
    "LogNormalFit",
    "rank_size",
    "fit_power_law",
    "fit_log_normal",
    "hill_exponent",
]


@dataclass(frozen=True)
class RankSizeFit:
    """OLS fit of log(value) on log(rank), re-expressed for original values.

    The fitted relation is ``value = scale * rank ** slope``; ``r_squared``
    refers to the log-log regression.  ``degenerate`` flags an all-equal
    series, for which the slope is 0 and R^2 is undefined (NaN).
    """

    slope: float
    scale: float
    r_squared: float
    n_points: int
    fit_domain: str = "all"
    degenerate: bool = False


@dataclass(frozen=True)
class LogNormalFit:
    mu: float
    sigma: float
    ks_statistic: float
    n: int


def rank_size(values) -> np.ndarray:
    """Descending (rank, value) series over the positive entries.

    Ties keep their input order (stable sort), receiving consecutive ranks.
    Returns an (m, 2) array with ranks 1..m in the first column.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1:
        raise ValidationError("rank_size expects a 1-d vector")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValidationError("values must be finite and nonnegative")
    v = v[v > 0]
    if v.size == 0:
        raise ValidationError("no positive values to rank")
    order = np.argsort(-v, kind="stable")
    ranked = v[order]
    return np.column_stack([np.arange(1, ranked.size + 1, dtype=float), ranked])


def fit_power_law(series: np.ndarray, top_k: int | None = None) -> RankSizeFit:
    """Fit ``value = scale * rank ** slope`` to a rank-size series by OLS on logs.

    Parameters
    ----------
    series : (m, 2) array from :func:`rank_size`
    top_k : int, optional
        Restrict the fit to the first ``top_k`` ranks.
    """
    s = np.asarray(series, dtype=float)
    if s.ndim != 2 or s.shape[1] != 2:
        raise ValidationError("expected a (rank, value) series")
    domain = "all"
    if top_k is not None:
        if top_k < 3:
            raise ValidationError("top_k must be at least 3")
        s = s[:top_k]
        domain = f"top_{top_k}"
    if s.shape[0] < 3:
        raise ValidationError("need at least 3 points to fit")

    log_rank = np.log(s[:, 0])
    log_val = np.log(s[:, 1])
    if np.ptp(log_val) == 0.0:
        return RankSizeFit(
            slope=0.0,
            scale=float(s[0, 1]),
            r_squared=float("nan"),
            n_points=s.shape[0],
            fit_domain=domain,
            degenerate=True,
        )

    x = log_rank - log_rank.mean()
    slope = float(np.dot(x, log_val) / np.dot(x, x))
    intercept = float(log_val.mean() - slope * log_rank.mean())
    resid = log_val - (intercept + slope * log_rank)
    ss_tot = float(np.dot(log_val - log_val.mean(), log_val - log_val.mean()))
    r2 = 1.0 - float(np.dot(resid, resid)) / ss_tot
    return RankSizeFit(
        slope=slope,
        scale=float(np.exp(intercept)),
        r_squared=r2,
        n_points=s.shape[0],
        fit_domain=domain,
    )


def fit_log_normal(values) -> LogNormalFit:
    """Maximum-likelihood log-normal fit plus a KS distance to the fitted CDF."""
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValidationError("log-normal fit needs strictly positive values")
    if v.size < 10:
        raise ValidationError("need at least 10 values")
    logs = np.log(v)
    mu = float(logs.mean())
    sigma = float(logs.std())  # MLE: no ddof correction
    if sigma == 0.0:
        raise ValidationError("degenerate sample: all values equal")
    ks = stats.kstest(v, stats.lognorm(s=sigma, scale=np.exp(mu)).cdf).statistic
    return LogNormalFit(mu=mu, sigma=sigma, ks_statistic=float(ks), n=v.size)


def hill_exponent(values, k: int) -> float:
    """Hill tail-index estimate from the top ``k`` order statistics.

    Labeled alternative to the rank-size OLS fit; the implied rank-size
    slope is ``-1 / alpha``.
    """
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    if k < 2 or k >= v.size:
        raise ValidationError("k must satisfy 2 <= k < n")
    if v[k] <= 0:
        raise ValidationError("top k+1 order statistics must be positive")
    return float(1.0 / np.mean(np.log(v[:k] / v[k])))
