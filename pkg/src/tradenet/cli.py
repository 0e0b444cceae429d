"""Command-line interface.

Every config key can be set in a flat key=value file (--config) and
overridden by the flag of the same name; subcommands run slices of the
pipeline and write their artifacts into the output directory.
"""

from __future__ import annotations

import sys

import click

from .config import load_config
from .errors import TradenetError
from .export import export_graph
from .network import density
from .pipeline import PipelineRun

_CONFIG_OPTIONS = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="key=value config file"),
    click.option("--flows", default=None, help="flows CSV path"),
    click.option("--countries", default=None, help="countries CSV path"),
    click.option("--dyads", default=None, help="dyad covariates CSV path"),
    click.option("--distances", default=None, help="optional distance CSV path"),
    click.option("--year", type=int, default=None),
    click.option("--symmetrization",
                 type=click.Choice(["arithmetic", "geometric"]), default=None),
    click.option("--estimator",
                 type=click.Choice(["zippml", "ppml", "ols_log"]), default=None),
    click.option("--selection/--no-selection", "selection", default=None),
    click.option("--selection-alpha", "selection_alpha", type=float, default=None),
    click.option("--zero-mode", "zero_mode",
                 type=click.Choice(["preserve", "zip_prune"]), default=None),
    click.option("--zip-prune-threshold", "zip_prune_threshold",
                 type=float, default=None),
    click.option("--zero-stage-fixed-effects/--no-zero-stage-fixed-effects",
                 "zero_stage_fixed_effects", default=None),
    click.option("--mst-edge-universe", "mst_edge_universe",
                 type=click.Choice(["all_pairs", "positive"]), default=None),
    click.option("--export-top-fraction", "export_top_fraction",
                 type=float, default=None),
    click.option("--output-dir", "output_dir", type=click.Path(), default=None),
    click.option("--seed", type=int, default=None),
    click.option("--reference-country", "reference_country",
                 type=int, default=None),
]


def _with_config_options(cmd):
    for option in reversed(_CONFIG_OPTIONS):
        cmd = option(cmd)
    return cmd


def _build_run(config_path, **overrides) -> PipelineRun:
    config = load_config(config_path, overrides)
    return PipelineRun(config)


def _guarded(action):
    try:
        return action()
    except TradenetError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@click.group()
def main():
    """Trade-network gravity and topology toolkit."""


@main.command("ingest-check")
@_with_config_options
def ingest_check(config_path, **overrides):
    """Validate the input files and report what would enter estimation."""

    def action():
        run = _build_run(config_path, **overrides)
        data = run.data()
        design = run.design()
        countries = data["countries"]
        click.echo(f"countries: {countries.n}")
        click.echo(f"flows year {data['flows'].year}: "
                   f"{int((data['flows'].values > 0).sum())} positive directed flows")
        click.echo(f"estimable dyads: {design.n_dyads}")
        click.echo(f"rejected dyads: {len(design.rejected)}")
        for i, j, reason in design.rejected[:20]:
            click.echo(
                f"  {countries.acronyms[i]}-{countries.acronyms[j]}: {reason}"
            )
        if len(design.rejected) > 20:
            click.echo(f"  ... and {len(design.rejected) - 20} more")

    _guarded(action)


@main.command()
@_with_config_options
@click.option("--kind", type=click.Choice(["original", "residual"]),
              default="original")
def stats(config_path, kind, **overrides):
    """Node-statistics battery for one network kind."""

    def action():
        run = _build_run(config_path, **overrides)
        run.write_statistics(kind)
        st = run.statistics(kind)
        click.echo(f"wrote node_statistics_{kind}.csv "
                   f"(components: {st.component_sizes})")

    _guarded(action)


@main.command()
@_with_config_options
def gravity(config_path, **overrides):
    """Fit the gravity equation and write the fit report."""

    def action():
        run = _build_run(config_path, **overrides)
        run.write_gravity_report()
        report = (run.outdir / "gravity_fit.txt").read_text(encoding="utf-8")
        click.echo(report, nl=False)

    _guarded(action)


@main.command()
@_with_config_options
def residual(config_path, **overrides):
    """Fit, assemble the residual network, and export it."""

    def action():
        run = _build_run(config_path, **overrides)
        run.write_network("residual")
        net = run.network("residual")
        click.echo(
            f"residual network: density {density(net):.4f}, "
            f"normalizer {net.normalizer:.6g}"
        )

    _guarded(action)


@main.command()
@_with_config_options
def compare(config_path, **overrides):
    """Correlation tables and rank comparisons, original vs residual."""

    def action():
        run = _build_run(config_path, **overrides)
        run.write_comparison()
        click.echo(
            (run.outdir / "correlation_table.txt").read_text(encoding="utf-8"),
            nl=False,
        )

    _guarded(action)


@main.command()
@_with_config_options
@click.option("--kind", type=click.Choice(["original", "residual", "both"]),
              default="both")
def mst(config_path, kind, **overrides):
    """Minimal spanning trees over the weight-derived metric distance."""

    def action():
        run = _build_run(config_path, **overrides)
        kinds = ("original", "residual") if kind == "both" else (kind,)
        for k in kinds:
            run.write_mst(k)
            click.echo(f"wrote mst_{k}.csv/.dot/.graphml")

    _guarded(action)


@main.command()
@_with_config_options
def dist(config_path, **overrides):
    """Distributional outputs: rank-size fits, conditional means, area shares."""

    def action():
        run = _build_run(config_path, **overrides)
        run.write_area_shares()
        run.write_distributions()
        run.write_conditional_means()
        click.echo(f"wrote distribution artifacts to {run.outdir}")

    _guarded(action)


@main.command()
@_with_config_options
@click.option("--kind", type=click.Choice(["original", "residual"]),
              default="original")
@click.option("--format", "fmt", type=click.Choice(["csv", "dot", "graphml"]),
              default="csv")
@click.option("--top-fraction", "top_fraction", type=float, default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def export(config_path, kind, fmt, top_fraction, out_path, **overrides):
    """Export a network as an edge list, DOT, or GraphML file."""

    def action():
        run = _build_run(config_path, **overrides)
        net = run.network(kind)
        path = out_path or str(run._path(f"network_{kind}_export.{fmt}"))
        export_graph(
            net,
            path,
            fmt,
            top_fraction=top_fraction,
            countries=run.data()["countries"],
        )
        click.echo(f"wrote {path}")

    _guarded(action)


@main.command()
@_with_config_options
def run(config_path, **overrides):
    """Full pipeline: build, fit, residual, compare, serialize everything."""

    def action():
        pipeline = _build_run(config_path, **overrides)
        manifest = pipeline.run_all()
        click.echo(f"pipeline complete: {len(manifest.artifacts)} artifacts "
                   f"in {pipeline.outdir}")
        for warning in manifest.warnings:
            click.echo(f"warning: {warning}")

    _guarded(action)


if __name__ == "__main__":
    main()
