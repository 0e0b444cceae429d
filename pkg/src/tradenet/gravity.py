"""Gravity-equation estimators: Poisson PML, logit zero stage, and the
two-stage zero-inflated combination, plus model comparison and selection.

The Poisson stage maximizes the pseudo-likelihood by iteratively
reweighted least squares with step halving; only the conditional mean has
to be right, so heteroscedasticity is handled through the sandwich
covariance rather than the likelihood.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .design import CovariateSet
from .errors import (
    ConvergenceError,
    EstimationError,
    RankDeficiencyError,
    SeparationError,
    ValidationError,
)

__all__ = [
    "GravityFit",
    "LogitFit",
    "VuongResult",
    "SelectionStep",
    "fit_ppml",
    "fit_logit_zero_stage",
    "fit_zippml",
    "fit_ols_log",
    "vuong_test",
    "adjusted_pseudo_r2",
    "select_general_to_specific",
    "significance_stars",
]

MAX_ITERATIONS = 100
LL_RELTOL = 1e-10
STEP_TOL = 1e-8
COLLINEARITY_TOL = 1e-8

ADJ_R2_DEFINITION = (
    "squared Pearson correlation between observed and fitted responses on "
    "the estimation sample, adjusted by (n-1)/(n-k-1)"
)


@dataclass(frozen=True)
class LogitFit:
    """Zero-stage logit: P(no trade on the dyad)."""

    names: tuple
    values: np.ndarray
    cov: np.ndarray
    probabilities: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    dropped_collinear: tuple = ()
    pinned_fraction: float = 0.0

    @property
    def coefficients(self) -> dict:
        return dict(zip(self.names, self.values.tolist()))


@dataclass(frozen=True)
class VuongResult:
    z: float
    p_value: float


@dataclass(frozen=True)
class GravityFit:
    """Estimated gravity model with residuals and diagnostics.

    ``residuals`` holds observed/fitted flow per retained dyad (0 where
    the observed flow is 0); multiplying the response by a constant leaves
    them unchanged.  For the two-stage estimator, ``names``/``values``
    are the Poisson-stage coefficients and ``zero_stage`` carries the
    logit stage.
    """

    estimator: str
    names: tuple
    values: np.ndarray
    robust_cov: np.ndarray
    fitted_means: np.ndarray
    residuals: np.ndarray
    response: np.ndarray
    dyad_i: np.ndarray
    dyad_j: np.ndarray
    n_countries: int
    loglik: float
    loglik_per_dyad: np.ndarray
    zero_stage: LogitFit | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def coefficients(self) -> dict:
        return dict(zip(self.names, self.values.tolist()))

    @property
    def robust_se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diagonal(self.robust_cov), 0.0, None))

    @property
    def zero_probabilities(self) -> np.ndarray | None:
        return None if self.zero_stage is None else self.zero_stage.probabilities


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def _prune_collinear(X, names, fe_mask):
    """Indices of a maximal independent column set, preferring non-FE columns.

    Orthogonalizes non-FE columns first (in design order), then FE columns,
    so exact dependencies land on fixed effects, which are dropped the way
    additional reference countries would be.  A dependency among non-FE
    columns raises; all-zero columns are dropped silently with a record.

    Returns (kept_indices, dropped_names, dropped_empty_names).
    """
    n, p = X.shape
    order = [k for k in range(p) if not fe_mask[k]] + [
        k for k in range(p) if fe_mask[k]
    ]
    basis = np.empty((n, 0))
    kept, dropped, empty = [], [], []
    for k in order:
        col = X[:, k]
        norm = np.linalg.norm(col)
        if norm == 0.0:
            empty.append(names[k])
            continue
        unit = col / norm
        resid = unit - basis @ (basis.T @ unit)
        rnorm = np.linalg.norm(resid)
        if rnorm < COLLINEARITY_TOL:
            dropped.append(names[k])
            if not fe_mask[k]:
                raise RankDeficiencyError([names[k]])
            continue
        # Re-orthogonalize once: classical Gram-Schmidt loses accuracy.
        resid = resid - basis @ (basis.T @ resid)
        basis = np.column_stack([basis, resid / np.linalg.norm(resid)])
        kept.append(k)
    kept.sort()
    return kept, tuple(dropped), tuple(empty)


def _poisson_loglik_vector(y, mu, weights):
    ll = special.xlogy(y, mu) - mu - special.gammaln(y + 1.0)
    return weights * ll


def _solve_wls(X, root_w, z, ridge_state):
    """Weighted LS via normal equations; jitters the diagonal on singularity."""
    Xw = X * root_w[:, None]
    zw = z * root_w
    G = Xw.T @ Xw
    b = Xw.T @ zw
    try:
        return np.linalg.solve(G, b)
    except np.linalg.LinAlgError:
        ridge_state["ridged"] = True
        jitter = 1e-10 * max(1.0, float(G.diagonal().max()))
        G = G + jitter * np.eye(G.shape[0])
        return np.linalg.solve(G, b)


def _irls_poisson(X, y, weights, beta0=None):
    """Poisson pseudo-ML by IRLS with step halving.

    Returns (beta, mu, llvec, total_ll, iterations, converged, ridged).
    """
    n, p = X.shape
    if beta0 is None:
        mu0 = (y + y.mean()) / 2.0
        eta0 = np.log(mu0)
        beta = _solve_wls(X, np.sqrt(weights * mu0), eta0, {})
    else:
        beta = np.asarray(beta0, dtype=float).copy()

    eta = X @ beta
    mu = np.exp(eta)
    ll = float(np.sum(_poisson_loglik_vector(y, mu, weights)))
    ridge_state = {"ridged": False}
    converged = False
    iterations = 0

    for iterations in range(1, MAX_ITERATIONS + 1):
        z = eta + (y - mu) / mu
        beta_new = _solve_wls(X, np.sqrt(weights * mu), z, ridge_state)
        step = beta_new - beta

        scale = 1.0
        for _ in range(40):
            cand = beta + scale * step
            eta_c = X @ cand
            with np.errstate(over="ignore"):
                mu_c = np.exp(np.clip(eta_c, -700, 700))
            ll_c = float(np.sum(_poisson_loglik_vector(y, mu_c, weights)))
            if np.isfinite(ll_c) and ll_c >= ll - 1e-12 * max(abs(ll), 1.0):
                break
            scale /= 2.0
        else:
            break  # no improving step found

        max_step = float(np.max(np.abs(scale * step)))
        improvement = ll_c - ll
        beta, eta, mu, ll = cand, eta_c, mu_c, ll_c
        if abs(improvement) < LL_RELTOL * max(abs(ll), 1.0) or max_step < STEP_TOL:
            # Do not stop while the score equations are still visibly open.
            if _score_orthogonality(X, y, mu, weights) < 1e-9:
                converged = True
                break

    llvec = _poisson_loglik_vector(y, mu, weights)
    return beta, mu, llvec, ll, iterations, converged, ridge_state["ridged"]


def _sandwich_cov(X, y, mu, weights):
    """Heteroscedasticity-robust covariance for the Poisson stage.

    Jackknife-style (HC3) meat: squared residuals are inflated by
    1/(1-h)^2 with h the weighted-regression leverage.  The information
    concentrates on the largest fitted means, so leverages are far from
    uniform and the uncorrected estimator is badly anti-conservative at
    a few hundred dyads.
    """
    info = (X * (weights * mu)[:, None]).T @ X
    bread = np.linalg.pinv(info)
    h = np.clip(
        weights * mu * np.einsum("ij,jk,ik->i", X, bread, X), 0.0, 0.99
    )
    score = X * (weights * (y - mu) / (1.0 - h))[:, None]
    meat = score.T @ score
    cov = bread @ meat @ bread
    return (cov + cov.T) / 2.0


def _score_orthogonality(X, y, mu, weights):
    score = np.abs(X.T @ (weights * (y - mu)))
    return float(score.max() / np.sum(np.abs(weights * y)))


def fit_ppml(
    design: CovariateSet,
    weights=None,
    *,
    beta0: dict | None = None,
    estimator_label: str = "ppml",
) -> GravityFit:
    """Poisson pseudo-maximum-likelihood fit of the design.

    Collinear fixed-effect columns are dropped automatically (recorded in
    the diagnostics, like extra reference countries); collinearity among
    named regressors raises :class:`RankDeficiencyError`.  The sandwich
    covariance in ``robust_cov`` is aligned with the kept columns.
    """
    y = design.response
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise ValidationError("response must be finite and nonnegative")
    w = np.ones(y.size) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != y.shape or np.any(w < 0):
        raise ValidationError("weights must be nonnegative, one per dyad")

    kept, dropped_fe, empty = _prune_collinear(
        design.X, design.columns, design.fe_mask
    )
    X = design.X[:, kept]
    names = tuple(design.columns[k] for k in kept)

    start = None
    if beta0 is not None:
        start = np.array([beta0.get(name, 0.0) for name in names])

    beta, mu, llvec, ll, iters, converged, ridged = _irls_poisson(X, y, w, start)
    if not converged:
        raise ConvergenceError(
            f"Poisson stage did not converge in {MAX_ITERATIONS} iterations "
            f"(last log-likelihood {ll:.6g})"
        )

    cov = _sandwich_cov(X, y, mu, w)
    resid = np.where(y > 0, y / mu, 0.0)
    fe_names = {design.columns[k] for k in design.blocks.get("fe", ())}

    diagnostics = {
        "iterations": iters,
        "converged": converged,
        "ridged": ridged,
        "dropped_collinear": dropped_fe,
        "empty_columns": empty,
        "score_orthogonality": _score_orthogonality(X, y, mu, w),
        "n_obs": int(y.size),
        "n_params": len(names),
        "adj_r2_definition": ADJ_R2_DEFINITION,
    }
    fit = GravityFit(
        estimator=estimator_label,
        names=names,
        values=beta,
        robust_cov=cov,
        fitted_means=mu,
        residuals=resid,
        response=y,
        dyad_i=design.dyad_i,
        dyad_j=design.dyad_j,
        n_countries=design.n_countries,
        loglik=ll,
        loglik_per_dyad=llvec,
        diagnostics=diagnostics,
    )
    try:
        diagnostics["adj_r2"] = adjusted_pseudo_r2(fit)
    except ValidationError:
        diagnostics["adj_r2"] = float("nan")
    wald, wald_df, wald_p = _wald_slopes(fit, fe_names)
    diagnostics["wald_chi2"] = wald
    diagnostics["wald_df"] = wald_df
    diagnostics["wald_p"] = wald_p
    return fit


def _wald_slopes(fit: GravityFit, fe_names) -> tuple:
    """Joint robust Wald test that every non-fixed-effect slope is zero."""
    idx = [k for k, name in enumerate(fit.names) if name not in fe_names]
    if not idx:
        return float("nan"), 0, float("nan")
    b = fit.values[idx]
    V = fit.robust_cov[np.ix_(idx, idx)]
    try:
        stat = float(b @ np.linalg.solve(V, b))
    except np.linalg.LinAlgError:
        stat = float(b @ np.linalg.pinv(V) @ b)
    df = len(idx)
    return stat, df, float(stats.chi2.sf(stat, df))


def adjusted_pseudo_r2(fit: GravityFit) -> float:
    """Adjusted squared correlation between observed and fitted responses."""
    n = fit.response.size
    k = len(fit.names)
    if n <= k + 1:
        raise ValidationError("too few observations for the adjustment")
    obs = fit.response
    pred = fit.fitted_means
    od = obs - obs.mean()
    pd_ = pred - pred.mean()
    denom = np.linalg.norm(od) * np.linalg.norm(pd_)
    if denom == 0.0:
        return float("nan")
    r2 = float(np.dot(od, pd_) / denom) ** 2
    return 1.0 - (1.0 - r2) * (n - 1) / (n - k - 1)


def fit_logit_zero_stage(
    design: CovariateSet,
    *,
    include_fixed_effects: bool = True,
    beta0: dict | None = None,
) -> LogitFit:
    """Maximum-likelihood logit for the probability of a zero flow.

    Uses the same regressor set as the Poisson stage (fixed effects can be
    excluded).  Complete separation raises :class:`SeparationError`;
    quasi-separation (some dyads driven to probability 0 or 1, typical for
    fixed effects of countries whose dyads are all positive) is tolerated
    and reported through ``pinned_fraction``.
    """
    y = (design.response == 0).astype(float)
    n_zero = int(y.sum())
    if n_zero == 0 or n_zero == y.size:
        raise ValidationError(
            "zero stage needs both outcome classes "
            f"(got {n_zero} zeros of {y.size} dyads)"
        )

    work = design if include_fixed_effects else _without_fe(design)
    kept, dropped, empty = _prune_collinear(work.X, work.columns, work.fe_mask)
    X = work.X[:, kept]
    names = tuple(work.columns[k] for k in kept)

    beta = np.zeros(len(names))
    if beta0 is not None:
        beta = np.array([beta0.get(name, 0.0) for name in names])

    eta = X @ beta
    ll = _logit_loglik(y, eta)
    converged = False
    iterations = 0
    ridge_state = {"ridged": False}
    for iterations in range(1, MAX_ITERATIONS + 1):
        p = special.expit(eta)
        wls = np.clip(p * (1.0 - p), 1e-10, None)
        z = eta + (y - p) / wls
        beta_new = _solve_wls(X, np.sqrt(wls), z, ridge_state)
        step = beta_new - beta

        scale = 1.0
        for _ in range(40):
            cand = beta + scale * step
            eta_c = X @ cand
            ll_c = _logit_loglik(y, eta_c)
            if np.isfinite(ll_c) and ll_c >= ll - 1e-12 * max(abs(ll), 1.0):
                break
            scale /= 2.0
        else:
            break

        improvement = ll_c - ll
        max_step = float(np.max(np.abs(scale * step)))
        beta, eta, ll = cand, eta_c, ll_c
        if abs(improvement) < LL_RELTOL * max(abs(ll), 1.0) or max_step < STEP_TOL:
            converged = True
            break

    p = special.expit(eta)
    pinned = float(np.mean((p < 1e-10) | (p > 1.0 - 1e-10)))
    # Complete separation: the fitted direction strictly splits the classes,
    # so the likelihood has no maximum and the coefficient norm diverges.
    if float(eta[y == 0].max()) < float(eta[y == 1].min()):
        raise SeparationError(
            "perfect separation in the zero stage; prune regressors "
            "(e.g. disable fixed effects in the logit) and refit"
        )
    if not converged:
        raise ConvergenceError(
            f"logit stage did not converge in {MAX_ITERATIONS} iterations"
        )

    wls = np.clip(p * (1.0 - p), 1e-10, None)
    info = (X * wls[:, None]).T @ X
    cov = np.linalg.pinv(info)
    return LogitFit(
        names=names,
        values=beta,
        cov=cov,
        probabilities=p,
        loglik=ll,
        iterations=iterations,
        converged=converged,
        dropped_collinear=dropped + empty,
        pinned_fraction=pinned,
    )


def _logit_loglik(y, eta):
    # log L = sum y*eta - log(1 + exp(eta)), computed stably
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _without_fe(design: CovariateSet) -> CovariateSet:
    fe_cols = set(design.blocks.get("fe", ()))
    if not fe_cols:
        return design
    keep = [k for k in range(len(design.columns)) if k not in fe_cols]
    remap = {old: new for new, old in enumerate(keep)}
    blocks = {
        b: tuple(remap[c] for c in cols)
        for b, cols in design.blocks.items()
        if b != "fe"
    }
    return dataclasses.replace(
        design,
        X=design.X[:, keep],
        columns=tuple(design.columns[k] for k in keep),
        blocks=blocks,
    )


def _zip_loglik_vector(y, mu, p_zero, weights):
    """Per-dyad log-likelihood of the zero-inflated Poisson mixture."""
    p = np.clip(p_zero, 1e-12, 1.0 - 1e-12)
    with np.errstate(divide="ignore"):
        ll_pos = np.log1p(-p) + special.xlogy(y, mu) - mu - special.gammaln(y + 1.0)
    ll_zero = np.logaddexp(np.log(p), np.log1p(-p) - mu)
    return weights * np.where(y == 0, ll_zero, ll_pos)


def fit_zippml(
    design: CovariateSet,
    weights=None,
    *,
    zero_stage_fixed_effects: bool = True,
    beta0: dict | None = None,
    zero_beta0: dict | None = None,
    compare_poisson: bool = True,
) -> GravityFit:
    """Two-stage zero-inflated Poisson pseudo-ML fit.

    Stage one is a logit for the zero indicator; stage two runs the
    Poisson pseudo-ML on the positive-flow dyads only.  Fitted means for
    every dyad come from the stage-two coefficients, residuals are
    observed/fitted (0 on zero dyads), and the reported log-likelihood is
    the zero-inflated mixture.  With a zero-free response the fit reduces
    exactly to :func:`fit_ppml`.

    When ``compare_poisson`` is set, a single-stage Poisson fit on the
    same dyads is run and the Vuong statistic against it is stored in the
    diagnostics.
    """
    y = design.response
    w = np.ones(y.size) if weights is None else np.asarray(weights, dtype=float)
    positive = y > 0
    if positive.all():
        fit = fit_ppml(design, weights, beta0=beta0, estimator_label="zippml")
        fit.diagnostics["zero_stage"] = "skipped: no zero flows"
        fit.diagnostics["vuong"] = None
        return fit
    if not positive.any():
        raise ValidationError("response has no positive flows to fit")

    zero_stage = fit_logit_zero_stage(
        design,
        include_fixed_effects=zero_stage_fixed_effects,
        beta0=zero_beta0,
    )

    stage2 = fit_ppml(
        design.subset_rows(positive),
        w[positive],
        beta0=beta0,
        estimator_label="zippml",
    )

    # Predict every dyad's mean from the stage-two coefficients.
    col_index = {name: k for k, name in enumerate(design.columns)}
    cols = [col_index[name] for name in stage2.names]
    mu_all = np.exp(design.X[:, cols] @ stage2.values)
    residuals = np.where(positive, y / mu_all, 0.0)

    llvec = _zip_loglik_vector(y, mu_all, zero_stage.probabilities, w)
    ll = float(llvec.sum())

    diagnostics = dict(stage2.diagnostics)
    diagnostics["n_obs"] = int(y.size)
    diagnostics["n_positive"] = int(positive.sum())
    diagnostics["zero_stage_iterations"] = zero_stage.iterations
    diagnostics["zero_stage_pinned_fraction"] = zero_stage.pinned_fraction
    diagnostics["zero_stage_fixed_effects"] = zero_stage_fixed_effects

    if compare_poisson:
        plain = fit_ppml(design, weights, beta0=beta0)
        try:
            vuong = vuong_test(llvec, plain.loglik_per_dyad)
        except ValidationError:
            vuong = None
        diagnostics["vuong"] = vuong
        diagnostics["poisson_loglik"] = plain.loglik
    else:
        diagnostics["vuong"] = None

    return GravityFit(
        estimator="zippml",
        names=stage2.names,
        values=stage2.values,
        robust_cov=stage2.robust_cov,
        fitted_means=mu_all,
        residuals=residuals,
        response=y,
        dyad_i=design.dyad_i,
        dyad_j=design.dyad_j,
        n_countries=design.n_countries,
        loglik=ll,
        loglik_per_dyad=llvec,
        zero_stage=zero_stage,
        diagnostics=diagnostics,
    )


def fit_ols_log(design: CovariateSet) -> GravityFit:
    """Log-linear OLS cross-check estimator.

    Zero flows are omitted (no zero handling beyond that); fitted means
    are ``exp`` of the linear prediction, with the usual caveat that this
    is the conditional median under log-normal errors.
    """
    positive = design.response > 0
    if positive.sum() < 3:
        raise ValidationError("too few positive flows for OLS")
    work = design.subset_rows(positive)
    kept, dropped_fe, empty = _prune_collinear(work.X, work.columns, work.fe_mask)
    X = work.X[:, kept]
    names = tuple(work.columns[k] for k in kept)
    logy = np.log(work.response)

    beta, *_ = np.linalg.lstsq(X, logy, rcond=None)
    fitted_log = X @ beta
    resid_log = logy - fitted_log

    # HC0 sandwich on the log scale.
    bread = np.linalg.pinv(X.T @ X)
    score = X * resid_log[:, None]
    cov = bread @ (score.T @ score) @ bread

    n = logy.size
    sigma2 = float(resid_log @ resid_log) / n
    llvec = -0.5 * (np.log(2 * np.pi * sigma2) + resid_log**2 / sigma2) - logy
    mu = np.exp(fitted_log)

    fit = GravityFit(
        estimator="ols_log",
        names=names,
        values=beta,
        robust_cov=cov,
        fitted_means=mu,
        residuals=work.response / mu,
        response=work.response,
        dyad_i=work.dyad_i,
        dyad_j=work.dyad_j,
        n_countries=work.n_countries,
        loglik=float(llvec.sum()),
        loglik_per_dyad=llvec,
        diagnostics={
            "dropped_collinear": dropped_fe,
            "empty_columns": empty,
            "n_obs": int(n),
            "n_params": len(names),
            "omitted_zero_dyads": int((~positive).sum()),
            "adj_r2_definition": ADJ_R2_DEFINITION,
        },
    )
    fit.diagnostics["adj_r2"] = adjusted_pseudo_r2(fit)
    return fit


def vuong_test(loglik_a, loglik_b) -> VuongResult:
    """Vuong model-comparison statistic from per-observation log-likelihoods.

    Positive z favors model A.  Identical or parallel likelihood vectors
    have no dispersion to compare and are rejected.
    """
    la = np.asarray(loglik_a, dtype=float)
    lb = np.asarray(loglik_b, dtype=float)
    if la.shape != lb.shape or la.ndim != 1:
        raise ValidationError("log-likelihood vectors must align")
    d = la - lb
    sd = float(d.std())
    if sd == 0.0:
        raise ValidationError(
            "models indistinguishable: zero variance in the likelihood ratio"
        )
    z = float(d.mean() * np.sqrt(d.size) / sd)
    return VuongResult(z=z, p_value=float(2.0 * stats.norm.sf(abs(z))))


@dataclass(frozen=True)
class SelectionStep:
    block: str
    lr_statistic: float
    df: int
    p_value: float
    loglik_after: float


def _block_wald_p(fit: GravityFit, design: CovariateSet, block: str):
    """Joint significance of a regressor block (robust Wald, both stages).

    The raw pseudo-likelihood ratio is badly oversized under the
    multiplicative heteroscedasticity PML is designed for; the sandwich
    Wald statistic is the PML-valid analogue, and is what the elimination
    decision uses.
    """
    block_names = {design.columns[c] for c in design.blocks[block]}

    def wald_of(names, values, cov):
        idx = [k for k, n in enumerate(names) if n in block_names]
        if not idx:
            return 0.0, 0
        b = np.asarray(values)[idx]
        V = np.asarray(cov)[np.ix_(idx, idx)]
        try:
            stat = float(b @ np.linalg.solve(V, b))
        except np.linalg.LinAlgError:
            stat = float(b @ np.linalg.pinv(V) @ b)
        return stat, len(idx)

    stat, df = wald_of(fit.names, fit.values, fit.robust_cov)
    if fit.zero_stage is not None:
        s1, d1 = wald_of(
            fit.zero_stage.names, fit.zero_stage.values, fit.zero_stage.cov
        )
        stat, df = stat + s1, df + d1
    if df == 0:
        return 1.0, 0.0, 0
    return float(stats.chi2.sf(stat, df)), stat, df


def select_general_to_specific(
    design: CovariateSet,
    retention_alpha: float = 0.05,
    estimator: str = "zippml",
    **fit_kwargs,
):
    """Backward elimination of regressor blocks that add nothing significant.

    At each round the remaining non-fixed-effect block with the largest
    joint p-value (robust Wald over both stages; see ``_block_wald_p``) is
    dropped while that p-value exceeds ``retention_alpha``, and the model
    is refit without it.  Dummy groups (e.g. the continent dummies) leave
    as whole blocks; fixed effects are never candidates.  Each recorded
    step carries the likelihood-ratio statistic of the refit alongside the
    decision p-value.

    Returns the final fit and the ordered trace of drops.
    """
    if not 0.0 < retention_alpha < 1.0:
        raise ValidationError("retention_alpha must be in (0, 1)")
    fitter = {"zippml": fit_zippml, "ppml": fit_ppml}.get(estimator)
    if fitter is None:
        raise ValidationError(f"unknown estimator {estimator!r}")

    def run(d, warm):
        kwargs = dict(fit_kwargs)
        if estimator == "zippml":
            kwargs.setdefault("compare_poisson", False)
        if warm is not None:
            try:
                # Warm starts speed up the refits but can sit absurdly far
                # from the reduced optimum when a strong block was dropped.
                return fitter(d, beta0=warm, **kwargs)
            except ConvergenceError:
                pass
        return fitter(d, **kwargs)

    current_design = design
    current_fit = run(current_design, None)
    trace = []

    while True:
        candidates = current_design.droppable_blocks
        if not candidates:
            break
        scored = [
            (_block_wald_p(current_fit, current_design, block)[0], block)
            for block in candidates
        ]
        p, block = max(scored)
        if p <= retention_alpha:
            break
        reduced_design = current_design.drop_blocks([block])
        reduced = run(reduced_design, current_fit.coefficients)
        df = _param_count(current_fit) - _param_count(reduced)
        lr = max(0.0, 2.0 * (current_fit.loglik - reduced.loglik))
        trace.append(
            SelectionStep(
                block=block,
                lr_statistic=lr,
                df=max(df, 0),
                p_value=p,
                loglik_after=reduced.loglik,
            )
        )
        current_fit, current_design = reduced, reduced_design

    if estimator == "zippml" and fit_kwargs.get("compare_poisson", True):
        # Final model gets its comparison diagnostics after selection.
        current_fit = fit_zippml(current_design, **fit_kwargs)
    return current_fit, tuple(trace)


def _param_count(fit: GravityFit) -> int:
    count = len(fit.names)
    if fit.zero_stage is not None:
        count += len(fit.zero_stage.names)
    return count
