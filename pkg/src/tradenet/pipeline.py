"""End-to-end orchestration: ingest, fit, derive, compare, serialize.

Every artifact writer is deterministic (fixed ordering and float
formatting), so two runs with the same config, inputs, and seed produce
byte-identical files; the manifest is the one exception, since it records
wall-clock stage timings.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as _stats

from .association import (
    area_trade_shares,
    correlation,
    correlation_table,
    kernel_conditional_mean,
    rank_comparison,
    STAT_NAMES,
)
from .config import AnalysisConfig
from .design import build_design
from .distfit import fit_log_normal, fit_power_law, hill_exponent, rank_size
from .errors import TradenetError, ValidationError
from .export import export_graph
from .gravity import (
    fit_ols_log,
    fit_ppml,
    fit_zippml,
    select_general_to_specific,
    significance_stars,
)
from .ingest import ingest
from .mst import kruskal_mst, mantegna_distance
from .network import assemble_residual_network, density, symmetrize
from .topology import all_statistics

__all__ = ["PipelineRun", "RunManifest", "run_pipeline"]

_G = "{:.12g}".format

DEFINITIONS = {
    "adjusted_r2": (
        "squared Pearson correlation between observed and fitted responses "
        "on the estimation sample, adjusted by (n-1)/(n-k-1)"
    ),
    "rwbc_normalization": (
        "accumulated current divided by (n-1)(n-2)/2 source-target pairs "
        "excluding pairs containing the node, n = component size"
    ),
    "bandwidth_method": (
        "least-squares leave-one-out cross-validation on a 30-point "
        "log-spaced grid; CV objective on a seeded subsample of at most "
        "2000 points"
    ),
    "mst_rescaling": "tree-edge distances divided by their maximum",
    "weight_correlation_sample": (
        "dyads with positive weight in the original network"
    ),
    "area_share_convention": (
        "row r: share of region-r countries' total trade (exports plus "
        "imports) exchanged with each region; within-region pair trade "
        "counts for both partners"
    ),
    "residual_estimation_response": "pre-normalization symmetric flows",
}


@dataclass
class RunManifest:
    config: dict
    input_digests: dict
    version: str
    timings: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    definitions: dict = field(default_factory=lambda: dict(DEFINITIONS))
    artifacts: list = field(default_factory=list)
    failed_stage: str | None = None
    error: str | None = None

    def to_json(self) -> str:
        payload = dataclasses.asdict(self)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _G(float(value))
    return str(value)


class PipelineRun:
    """Caching pipeline: each stage computes once, artifacts write on demand."""

    def __init__(self, config: AnalysisConfig):
        self.config = config
        self.outdir = Path(config.output_dir)
        self._cache: dict = {}
        self.warnings: list = []
        self.timings: dict = {}
        self.artifacts: list = []

    # -- stage machinery -------------------------------------------------

    def _stage(self, name, builder):
        if name not in self._cache:
            start = time.perf_counter()
            self._cache[name] = builder()
            self.timings[name] = time.perf_counter() - start
        return self._cache[name]

    def _warn(self, message):
        if message not in self.warnings:
            self.warnings.append(message)

    def _path(self, name) -> Path:
        self.outdir.mkdir(parents=True, exist_ok=True)
        path = self.outdir / name
        rel = str(name)
        if rel not in self.artifacts:
            self.artifacts.append(rel)
        return path

    def _write_table(self, name, comment, columns):
        """columns: list of (header, sequence); deterministic formatting."""
        path = self._path(name)
        headers = [c[0] for c in columns]
        series = [c[1] for c in columns]
        rows = len(series[0]) if series else 0
        lines = [f"# {comment}", ",".join(headers)]
        for r in range(rows):
            lines.append(",".join(_fmt(col[r]) for col in series))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    # -- data stages ------------------------------------------------------

    def data(self):
        def build():
            countries, flows, dyads = ingest(self.config)
            return {"countries": countries, "flows": flows, "dyads": dyads}

        return self._stage("ingest", build)

    def network(self, kind="original"):
        if kind == "original":
            def build():
                net = symmetrize(
                    self.data()["flows"], mode=self.config.symmetrization
                )
                if net.degenerate:
                    self._warn("original network is all-zero (degenerate)")
                return net

            return self._stage("network", build)
        if kind == "residual":
            return self._stage("residual", self._build_residual)
        raise ValidationError(f"unknown network kind {kind!r}")

    def design(self):
        def build():
            d = self.data()
            des = build_design(
                d["countries"],
                d["dyads"],
                self.network("original"),
                reference_country=self.config.reference_country,
            )
            if des.rejected:
                self._warn(
                    f"{len(des.rejected)} dyads rejected before estimation"
                )
            return des

        return self._stage("design", build)

    def fit(self):
        def build():
            cfg = self.config
            des = self.design()
            trace = ()
            if cfg.estimator == "ols_log":
                fit = fit_ols_log(des)
            elif cfg.selection:
                kwargs = {}
                if cfg.estimator == "zippml":
                    kwargs["zero_stage_fixed_effects"] = cfg.zero_stage_fixed_effects
                fit, trace = select_general_to_specific(
                    des,
                    retention_alpha=cfg.selection_alpha,
                    estimator=cfg.estimator,
                    **kwargs,
                )
            elif cfg.estimator == "zippml":
                fit = fit_zippml(
                    des, zero_stage_fixed_effects=cfg.zero_stage_fixed_effects
                )
            else:
                fit = fit_ppml(des)
            for label in ("dropped_collinear", "empty_columns"):
                cols = fit.diagnostics.get(label, ())
                if cols:
                    self._warn(f"{label}: {', '.join(cols)}")
            pinned = fit.diagnostics.get("zero_stage_pinned_fraction", 0.0)
            if pinned:
                self._warn(
                    f"zero stage pinned {_G(100 * pinned)}% of dyads to "
                    "probability 0/1 (quasi-separation)"
                )
            return {"fit": fit, "trace": trace}

        return self._stage("gravity", build)

    def _build_residual(self):
        cfg = self.config
        net = assemble_residual_network(
            self.fit()["fit"],
            self.network("original"),
            zero_mode=cfg.zero_mode,
            prune_threshold=(
                cfg.zip_prune_threshold if cfg.zero_mode == "zip_prune" else None
            ),
        )
        if net.degenerate:
            self._warn("residual network is all-zero (degenerate)")
        if net.meta.get("missing_dyads"):
            self._warn(
                f"residual network: {net.meta['missing_dyads']} dyads carried "
                "no residual (rejected before estimation) and were set to 0"
            )
        return net

    def statistics(self, kind="original"):
        return self._stage(
            f"statistics_{kind}", lambda: all_statistics(self.network(kind))
        )

    # -- artifact writers --------------------------------------------------

    def write_area_shares(self):
        d = self.data()
        shares = self._stage(
            "area_shares",
            lambda: area_trade_shares(d["flows"], d["countries"]),
        )
        columns = [("region", shares.regions)]
        for k, r in enumerate(shares.regions):
            columns.append((f"share_with_{r}[pct]", shares.shares[:, k]))
        columns.append(("world_share[pct]", shares.world_share))
        self._write_table(
            "area_shares.csv",
            "percentage of each region's total trade by partner region, "
            f"year={d['flows'].year}",
            columns,
        )

    def write_network(self, kind):
        net = self.network(kind)
        export_graph(net, self._path(f"network_{kind}.csv"), "csv")

    def write_statistics(self, kind):
        stats = self.statistics(kind)
        countries = self.data()["countries"]
        cols = [
            ("country_id", countries.ids),
            ("acronym", countries.acronyms),
            (f"nd[{kind},count]", stats.nd),
            (f"ns[{kind},normalized-weight]", stats.ns),
            (f"anns[{kind},normalized-weight]", stats.anns),
            (f"bcc[{kind},fraction]", stats.bcc),
            (f"wcc[{kind},dimensionless]", stats.wcc),
            (f"rwbc[{kind},dimensionless]", stats.rwbc),
            (f"anns_undefined[{kind},flag]", stats.anns_undefined),
            (f"clustering_undefined[{kind},flag]", stats.clustering_undefined),
        ]
        self._write_table(
            f"node_statistics_{kind}.csv",
            f"node statistics, network kind={kind}, "
            f"components={stats.component_sizes}",
            cols,
        )

    def write_gravity_report(self):
        bundle = self.fit()
        fit, trace = bundle["fit"], bundle["trace"]
        des = self.design()
        countries = self.data()["countries"]

        self._path("gravity_fit.txt").write_text(
            gravity_report_text(fit), encoding="utf-8"
        )
        payload = gravity_report_dict(fit)
        self._path("gravity_fit.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        if des.rejected:
            acr = countries.acronyms
            self._write_table(
                "gravity_rejections.csv",
                "dyads excluded from estimation",
                [
                    ("country_i", [acr[i] for i, _, _ in des.rejected]),
                    ("country_j", [acr[j] for _, j, _ in des.rejected]),
                    ("reason", [r for _, _, r in des.rejected]),
                ],
            )
        if trace:
            self._write_table(
                "selection_trace.csv",
                "general-to-specific drops, in order",
                [
                    ("dropped_block", [s.block for s in trace]),
                    ("lr_statistic", [s.lr_statistic for s in trace]),
                    ("df", [s.df for s in trace]),
                    ("p_value", [s.p_value for s in trace]),
                    ("loglik_after", [s.loglik_after for s in trace]),
                ],
            )

    def _rank_series(self, kind):
        """(series name, positive values) pairs for one network kind."""
        net = self.network(kind)
        stats = self.statistics(kind)
        iu = np.triu_indices(net.n, k=1)
        w = net.weights[iu]
        series = [("weights", w[w > 0])]
        for name in STAT_NAMES:
            v = np.asarray(stats.as_columns()[name], dtype=float)
            series.append((name, v[v > 0]))
        return series

    def write_distributions(self):
        fits_rows = []
        for kind in ("original", "residual"):
            for name, values in self._rank_series(kind):
                if values.size == 0:
                    self._warn(f"no positive {name} values in {kind} network")
                    continue
                series = rank_size(values)
                try:
                    pl = fit_power_law(series)
                except ValidationError:
                    self._warn(f"rank-size fit skipped for {kind}/{name}")
                    continue
                fitted = pl.scale * series[:, 0] ** pl.slope
                self._write_table(
                    f"rank_size_{kind}_{name}.csv",
                    f"rank-size series, kind={kind}, statistic={name}",
                    [
                        ("rank[count]", series[:, 0].astype(int)),
                        (f"value[{kind},{name}]", series[:, 1]),
                        (f"powerlaw_fit[{kind},{name}]", fitted),
                    ],
                )
                row = {
                    "kind": kind,
                    "series": name,
                    "n": series.shape[0],
                    "powerlaw_slope": pl.slope,
                    "powerlaw_scale": pl.scale,
                    "powerlaw_r2": pl.r_squared,
                    "degenerate": pl.degenerate,
                }
                if values.size >= 10 and np.ptp(values) > 0:
                    ln = fit_log_normal(values)
                    row.update(
                        lognormal_mu=ln.mu,
                        lognormal_sigma=ln.sigma,
                        lognormal_ks=ln.ks_statistic,
                    )
                else:
                    row.update(
                        lognormal_mu=float("nan"),
                        lognormal_sigma=float("nan"),
                        lognormal_ks=float("nan"),
                    )
                k_tail = max(2, min(values.size - 1, int(np.sqrt(values.size))))
                if values.size >= 4 and np.sort(values)[::-1][k_tail] > 0:
                    row["hill_alpha_alt"] = hill_exponent(values, k_tail)
                else:
                    row["hill_alpha_alt"] = float("nan")
                fits_rows.append(row)
        if fits_rows:
            keys = list(fits_rows[0].keys())
            self._write_table(
                "distribution_fits.csv",
                "rank-size power-law fits (hill_alpha_alt is a labeled "
                "alternative tail estimate, never the default)",
                [(k, [r[k] for r in fits_rows]) for k in keys],
            )

    def write_conditional_means(self):
        d = self.data()
        net = self.network("original")
        gdp = d["countries"].gdp
        dist = d["dyads"].distance_km
        ii, jj = np.triu_indices(net.n, k=1)
        flows = net.flows[ii, jj]
        ok = (flows > 0) & np.isfinite(dist[ii, jj]) & (dist[ii, jj] > 0)
        mass = gdp[ii] * gdp[jj]
        curves = {
            "gdp_product": mass[ok],
            "distance": dist[ii, jj][ok],
            "gdp_over_distance": (mass / dist[ii, jj])[ok],
        }
        logy = np.log(flows[ok])
        for name, x in curves.items():
            if x.size < 20:
                self._warn(f"conditional mean {name} skipped: too few dyads")
                continue
            curve = kernel_conditional_mean(
                np.log(x), logy, seed=self.config.seed
            )
            self._write_table(
                f"conditional_mean_{name}.csv",
                f"local-linear conditional mean of log flow vs log {name}, "
                f"bandwidth={_G(curve.bandwidth)} ({curve.bandwidth_method})",
                [
                    (f"log_{name}[log-units]", curve.eval_points),
                    ("estimate[log-flow,original]", curve.estimate),
                    ("lower95[log-flow,original]", curve.lower),
                    ("upper95[log-flow,original]", curve.upper),
                ],
            )

    def write_comparison(self):
        stats_w = self.statistics("original")
        stats_e = self.statistics("residual")
        countries = self.data()["countries"]
        table = correlation_table(stats_w, stats_e, countries.per_capita_gdp)

        k = len(table.labels)
        cols = [("variable", table.labels)]
        for b in range(k):
            cols.append(
                (f"r_{table.labels[b]}", table.coefficients[:, b])
            )
        self._write_table(
            "correlation_table.csv",
            "pairwise Pearson correlations; see correlation_table.txt for "
            "significance marks",
            cols,
        )
        self._path("correlation_table.txt").write_text(
            correlation_table_text(table), encoding="utf-8"
        )

        rows = []
        movers = []
        acr = countries.acronyms
        for name in STAT_NAMES:
            comp = rank_comparison(stats_w, stats_e, name)
            rows.append(comp)
            for direction, entries in (
                ("gain", comp.gainers),
                ("loss", comp.losers),
            ):
                for idx, ra, rb in entries:
                    movers.append((name, direction, acr[idx], ra, rb))
        self._write_table(
            "rank_comparison.csv",
            "Spearman correlation of country rankings, original vs residual",
            [
                ("statistic", [r.statistic for r in rows]),
                ("spearman", [r.spearman for r in rows]),
                ("p_value", [r.p_value for r in rows]),
            ],
        )
        self._write_table(
            "rank_movers.csv",
            "largest rank displacements between original and residual "
            "rankings (rank 1 = largest)",
            [
                ("statistic", [m[0] for m in movers]),
                ("direction", [m[1] for m in movers]),
                ("acronym", [m[2] for m in movers]),
                ("rank_original", [m[3] for m in movers]),
                ("rank_residual", [m[4] for m in movers]),
            ],
        )

        net_w = self.network("original")
        net_e = self.network("residual")
        iu = np.triu_indices(net_w.n, k=1)
        mask = net_w.weights[iu] > 0
        r, p = correlation(net_w.weights[iu][mask], net_e.weights[iu][mask])
        summary = {
            "density_original": density(net_w),
            "density_residual": density(net_e),
            "weight_correlation": r,
            "weight_correlation_p": p,
            "weight_correlation_sample": DEFINITIONS["weight_correlation_sample"],
            "spearman_rank_correlations": {
                row.statistic: row.spearman for row in rows
            },
        }
        self._path("comparison_summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    def write_mst(self, kind):
        net = self.network(kind)
        dist = mantegna_distance(net)
        tree = self._stage(
            f"mst_{kind}",
            lambda: kruskal_mst(
                dist,
                edge_universe=self.config.mst_edge_universe,
                positive_mask=net.weights > 0,
            ),
        )
        if tree.component_count > 1:
            self._warn(
                f"mst ({kind}): {tree.component_count} components (forest)"
            )
        countries = self.data()["countries"]
        for fmt in ("csv", "dot", "graphml"):
            export_graph(
                tree,
                self._path(f"mst_{kind}.{fmt}"),
                fmt,
                countries=countries,
            )

    def write_graph_exports(self, kind):
        net = self.network(kind)
        countries = self.data()["countries"]
        for fmt in ("dot", "graphml"):
            export_graph(
                net,
                self._path(f"network_{kind}_top.{fmt}"),
                fmt,
                top_fraction=self.config.export_top_fraction,
                countries=countries,
            )

    # -- full pipeline -----------------------------------------------------

    def manifest(self, failed_stage=None, error=None) -> RunManifest:
        from . import __version__

        digests = {}
        for label in ("flows", "countries", "dyads", "distances"):
            path = getattr(self.config, label)
            if path:
                digests[label] = _sha256(path)
        return RunManifest(
            config=self.config.as_dict(),
            input_digests=digests,
            version=__version__,
            timings={k: round(v, 6) for k, v in self.timings.items()},
            warnings=list(self.warnings),
            artifacts=sorted(self.artifacts),
            failed_stage=failed_stage,
            error=error,
        )

    def write_manifest(self, failed_stage=None, error=None) -> RunManifest:
        manifest = self.manifest(failed_stage=failed_stage, error=error)
        self._path("manifest.json").write_text(
            manifest.to_json(), encoding="utf-8"
        )
        return manifest

    def run_all(self) -> RunManifest:
        steps = [
            ("ingest", lambda: self.data()),
            ("area_shares", self.write_area_shares),
            ("network", lambda: self.write_network("original")),
            ("statistics_original", lambda: self.write_statistics("original")),
            ("gravity", self.write_gravity_report),
            ("residual", lambda: self.write_network("residual")),
            ("statistics_residual", lambda: self.write_statistics("residual")),
            ("distributions", self.write_distributions),
            ("conditional_means", self.write_conditional_means),
            ("comparison", self.write_comparison),
            ("mst_original", lambda: self.write_mst("original")),
            ("mst_residual", lambda: self.write_mst("residual")),
            ("exports", lambda: [
                self.write_graph_exports("original"),
                self.write_graph_exports("residual"),
            ]),
        ]
        for name, step in steps:
            start = time.perf_counter()
            try:
                step()
            except Exception as exc:
                self.write_manifest(failed_stage=name, error=str(exc))
                raise TradenetError(f"stage {name!r} failed: {exc}") from exc
            self.timings[f"step:{name}"] = time.perf_counter() - start
        return self.write_manifest()


def run_pipeline(config: AnalysisConfig) -> RunManifest:
    """Execute every stage and write all artifacts to the output directory."""
    return PipelineRun(config).run_all()


# -- report rendering ------------------------------------------------------


def gravity_report_dict(fit) -> dict:
    se = fit.robust_se
    z = np.divide(
        fit.values, se, out=np.zeros_like(fit.values), where=se > 0
    )
    pvals = 2.0 * _stats.norm.sf(np.abs(z))
    d = fit.diagnostics
    vuong = d.get("vuong")
    payload = {
        "estimator": fit.estimator,
        "n_obs": d.get("n_obs"),
        "coefficients": {
            name: {
                "value": float(v),
                "robust_se": float(s),
                "p_value": float(p),
                "stars": significance_stars(float(p)),
            }
            for name, v, s, p in zip(fit.names, fit.values, se, pvals)
            if not name.startswith("fe_")
        },
        "fixed_effects": sum(1 for n in fit.names if n.startswith("fe_")),
        "diagnostics": {
            "log_likelihood": fit.loglik,
            "adjusted_r2": d.get("adj_r2"),
            "adjusted_r2_definition": d.get("adj_r2_definition"),
            "wald_chi2": d.get("wald_chi2"),
            "wald_df": d.get("wald_df"),
            "wald_p": d.get("wald_p"),
            "vuong_z": None if vuong is None else vuong.z,
            "vuong_p": None if vuong is None else vuong.p_value,
            "iterations": d.get("iterations"),
            "converged": d.get("converged"),
            "dropped_collinear": list(d.get("dropped_collinear", ())),
            "score_orthogonality": d.get("score_orthogonality"),
        },
    }
    if fit.zero_stage is not None:
        zs = fit.zero_stage
        payload["zero_stage"] = {
            "coefficients": {
                name: float(v)
                for name, v in zip(zs.names, zs.values)
                if not name.startswith("fe_")
            },
            "fixed_effects": sum(1 for n in zs.names if n.startswith("fe_")),
            "pinned_fraction": zs.pinned_fraction,
            "iterations": zs.iterations,
        }
    return payload


def gravity_report_text(fit) -> str:
    """Aligned text report: coefficient, robust SE, stars, then diagnostics."""
    payload = gravity_report_dict(fit)
    lines = [
        f"Gravity fit ({payload['estimator']}), "
        f"{payload['n_obs']} dyads",
        "",
        f"{'regressor':<16}{'coef':>12}{'rob. SE':>12}  sig",
        "-" * 46,
    ]
    for name, row in payload["coefficients"].items():
        lines.append(
            f"{name:<16}{row['value']:>12.4f}{row['robust_se']:>12.4f}  "
            f"{row['stars']}"
        )
    lines.append("-" * 46)
    lines.append(f"Constant          NO")
    fe = payload["fixed_effects"]
    lines.append(f"Country dummies   {'YES (' + str(fe) + ')' if fe else 'NO'}")
    diag = payload["diagnostics"]
    lines.append(f"Log likelihood    {_G(diag['log_likelihood'])}")
    if diag["adjusted_r2"] is not None:
        lines.append(f"Adj. R2           {diag['adjusted_r2']:.4f}")
    if diag["wald_chi2"] is not None and np.isfinite(diag["wald_chi2"]):
        lines.append(
            f"Wald chi2({diag['wald_df']})     {_G(diag['wald_chi2'])}"
            f"   p={_G(diag['wald_p'])}"
        )
    if diag["vuong_z"] is not None:
        lines.append(
            f"Vuong Z           {diag['vuong_z']:.4f}   p={_G(diag['vuong_p'])}"
        )
    lines.append(
        "Legend: * p<0.05, ** p<0.01, *** p<0.001 (robust); "
        "fixed-effect rows omitted"
    )
    return "\n".join(lines) + "\n"


def correlation_table_text(table) -> str:
    """Aligned text matrix; insignificant coefficients wrapped in brackets.

    Brackets play the role of the boldface convention in print: they mark
    coefficients NOT statistically different from zero at the table's
    significance level.
    """
    labels = table.labels
    width = max(len(x) for x in labels) + 2
    cell = 12
    lines = [
        "Correlation structure (Pearson); [r] = not significant at "
        f"{int(table.alpha * 100)}%",
        " " * width + "".join(f"{x:>{cell}}" for x in labels),
    ]
    k = len(labels)
    for a in range(k):
        row = [f"{labels[a]:<{width}}"]
        for b in range(k):
            if b < a:
                row.append(" " * cell)
                continue
            if a == b:
                row.append(f"{'-':>{cell}}")
                continue
            r = table.coefficients[a, b]
            mark = f"{r:.4f}" if table.significant[a, b] else f"[{r:.4f}]"
            row.append(f"{mark:>{cell}}")
        lines.append("".join(row))
    return "\n".join(lines) + "\n"
