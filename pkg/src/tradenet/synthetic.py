"""Seeded synthetic trade worlds with a known data-generating process.

Used by the test suite as an oracle (the generating coefficients are the
truth estimators must recover) and handy for smoke-testing the CLI without
real data:

    python -m tradenet.synthetic OUTDIR --countries 50 --seed 7
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .design import DyadCovariates
from .ingest import great_circle_matrix
from .network import CountryTable, DirectedFlowMatrix

__all__ = ["SyntheticWorld", "synthetic_world", "write_world_csv", "DEFAULT_COEFFICIENTS"]

# Truth used unless overridden; keys match design column names.
DEFAULT_COEFFICIENTS = {
    "log_gdp_i": 1.0,
    "log_gdp_j": 1.0,
    "log_dist": -1.0,
    "log_area_i": -0.1,
    "log_area_j": -0.1,
    "log_pop_i": -0.2,
    "log_pop_j": -0.2,
    "ll_i": -0.3,
    "ll_j": -0.3,
    "ctg": 0.3,
    "coml": 0.2,
    "col": 0.15,
    "ta": 0.2,
}

_CONTINENTS = ("americas", "europe", "africa", "asia", "oceania")


@dataclass(frozen=True)
class SyntheticWorld:
    countries: CountryTable
    flows: DirectedFlowMatrix
    dyads: DyadCovariates
    truth: dict


def _calibrate_intercept(z, target):
    """Intercept making mean(expit(intercept + z)) hit the target fraction."""
    lo, hi = -30.0, 30.0
    for _ in range(80):
        mid = (lo + hi) / 2.0
        if float(special.expit(mid + z).mean()) < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def synthetic_world(
    n_countries: int = 50,
    seed: int = 0,
    year: int = 2000,
    *,
    zero_inflation: float = 0.35,
    noise_sd: float = 0.4,
    country_effect_sd: float = 0.3,
    size_dispersion: float = 1.0,
    coefficients: dict | None = None,
    base_flow: float = 1e4,
) -> SyntheticWorld:
    """Draw a gravity world with known coefficients and multiplicative noise.

    Flows follow ``mu * eta`` where ``log mu`` is linear in the design
    columns (plus symmetric per-country effects) and ``eta`` is unit-mean
    log-normal.  Zero dyads are structural, drawn from a logit that loads
    negatively on the GDP product and positively on distance, so sparsity
    concentrates where gravity predicts little trade.  Set
    ``zero_inflation=0`` for a fully dense world and
    ``country_effect_sd=0`` to make all slopes identifiable without fixed
    effects.

    ``size_dispersion`` scales the spread of country masses (population,
    per-capita GDP, area).  At 1.0 flows span several orders of magnitude,
    like real trade; smaller values make dyads more comparable, so the
    Poisson-stage information spreads evenly instead of concentrating on a
    few giant flows.
    """
    if n_countries < 3:
        raise ValueError("need at least 3 countries")
    rng = np.random.default_rng(seed)
    coef = dict(DEFAULT_COEFFICIENTS if coefficients is None else coefficients)

    log_pop = rng.normal(16.0, 1.2 * size_dispersion, n_countries)
    log_pcgdp = rng.normal(8.5, 0.8 * size_dispersion, n_countries)
    gdp = np.exp(log_pop + log_pcgdp)
    population = np.exp(log_pop)
    area = np.exp(rng.normal(11.5, 1.3 * size_dispersion, n_countries))
    cpi = 100.0 * np.exp(rng.normal(0.0, 0.05, n_countries))
    landlocked = rng.random(n_countries) < 0.18
    latitude = np.degrees(np.arcsin(rng.uniform(-1.0, 1.0, n_countries)))
    longitude = rng.uniform(-180.0, 180.0, n_countries)

    sector = np.minimum(
        ((longitude + 180.0) / 360.0 * len(_CONTINENTS)).astype(int),
        len(_CONTINENTS) - 1,
    )
    continent = tuple(_CONTINENTS[s] for s in sector)
    region = tuple(
        f"{_CONTINENTS[s]}_{'n' if lat >= 0 else 's'}"
        for s, lat in zip(sector, latitude)
    )

    ids = np.arange(1, n_countries + 1) * 10
    countries = CountryTable(
        ids=ids,
        acronyms=tuple(f"C{k:03d}" for k in range(n_countries)),
        names=tuple(f"Country {k:03d}" for k in range(n_countries)),
        gdp=gdp,
        population=population,
        area=area,
        landlocked=landlocked,
        continent=continent,
        region=region,
        cpi=cpi,
        latitude=latitude,
        longitude=longitude,
    )

    distance = great_circle_matrix(latitude, longitude)
    near = np.quantile(distance[np.triu_indices(n_countries, 1)], 0.05)
    contiguity = ((distance <= near) & ~np.eye(n_countries, dtype=bool)).astype(float)

    def sym_bernoulli(p):
        draw = rng.random((n_countries, n_countries))
        upper = np.triu((draw < p).astype(float), k=1)
        return upper + upper.T

    dyads = DyadCovariates(
        distance_km=distance,
        contiguity=contiguity,
        common_currency=sym_bernoulli(0.05),
        common_language=sym_bernoulli(0.15),
        colony=sym_bernoulli(0.05),
        trade_agreement=sym_bernoulli(0.20),
        common_religion=sym_bernoulli(0.20),
        exchange_rate=np.exp(
            (lambda m: np.triu(m, 1) + np.triu(m, 1).T)(
                rng.normal(0.0, 1.0, (n_countries, n_countries))
            )
        ),
    )

    di, dj = np.tril_indices(n_countries, k=-1)
    log_gdp = np.log(gdp)
    predictor = (
        coef.get("log_gdp_i", 0.0) * log_gdp[di]
        + coef.get("log_gdp_j", 0.0) * log_gdp[dj]
        + coef.get("log_dist", 0.0) * np.log(distance[di, dj])
        + coef.get("log_area_i", 0.0) * np.log(area[di])
        + coef.get("log_area_j", 0.0) * np.log(area[dj])
        + coef.get("log_pop_i", 0.0) * log_pop[di]
        + coef.get("log_pop_j", 0.0) * log_pop[dj]
        + coef.get("ll_i", 0.0) * landlocked[di]
        + coef.get("ll_j", 0.0) * landlocked[dj]
        + coef.get("ctg", 0.0) * contiguity[di, dj]
        + coef.get("coml", 0.0) * dyads.common_language[di, dj]
        + coef.get("col", 0.0) * dyads.colony[di, dj]
        + coef.get("ta", 0.0) * dyads.trade_agreement[di, dj]
    )
    effects = (
        rng.normal(0.0, country_effect_sd, n_countries)
        if country_effect_sd > 0
        else np.zeros(n_countries)
    )
    predictor = predictor + effects[di] + effects[dj]
    intercept = float(np.log(base_flow) - predictor.mean())
    mu = np.exp(intercept + predictor)

    eta = np.exp(rng.normal(-0.5 * noise_sd**2, noise_sd, mu.size))

    zero_model = None
    zero = np.zeros(mu.size, dtype=bool)
    if zero_inflation > 0:
        size = log_gdp[di] + log_gdp[dj]
        dist_log = np.log(distance[di, dj])
        z = -1.2 * (size - size.mean()) / size.std() + 0.8 * (
            dist_log - dist_log.mean()
        ) / dist_log.std()
        z0 = _calibrate_intercept(z, zero_inflation)
        p_zero = special.expit(z0 + z)
        zero = rng.random(mu.size) < p_zero
        zero_model = {
            "intercept": z0,
            "gdp_loading": -1.2,
            "dist_loading": 0.8,
            "target_fraction": zero_inflation,
        }

    totals = np.where(zero, 0.0, 2.0 * mu * eta)
    share = rng.uniform(0.4, 0.6, mu.size)
    values = np.zeros((n_countries, n_countries))
    values[di, dj] = totals * share
    values[dj, di] = totals * (1.0 - share)
    flows = DirectedFlowMatrix(values=values, year=year)

    truth = {
        "coefficients": coef,
        "intercept": intercept,
        "country_effects": effects,
        "noise_sd": noise_sd,
        "zero_model": zero_model,
        "seed": seed,
    }
    return SyntheticWorld(countries=countries, flows=flows, dyads=dyads, truth=truth)


def write_world_csv(world: SyntheticWorld, outdir) -> dict:
    """Write flows.csv / countries.csv / dyads.csv fixtures; returns the paths."""
    import os

    os.makedirs(outdir, exist_ok=True)
    c = world.countries
    paths = {
        "countries": os.path.join(outdir, "countries.csv"),
        "flows": os.path.join(outdir, "flows.csv"),
        "dyads": os.path.join(outdir, "dyads.csv"),
    }

    with open(paths["countries"], "w", encoding="utf-8") as fh:
        fh.write(
            "id,acronym,name,gdp,population,area_km2,landlocked,"
            "continent,region,cpi,latitude,longitude\n"
        )
        for k in range(c.n):
            fh.write(
                f"{c.ids[k]},{c.acronyms[k]},{c.names[k]},{c.gdp[k]:.17g},"
                f"{c.population[k]:.17g},{c.area[k]:.17g},{int(c.landlocked[k])},"
                f"{c.continent[k]},{c.region[k]},{c.cpi[k]:.17g},"
                f"{c.latitude[k]:.17g},{c.longitude[k]:.17g}\n"
            )

    v = world.flows.values
    with open(paths["flows"], "w", encoding="utf-8") as fh:
        fh.write("exporter_id,importer_id,year,value\n")
        for a in range(c.n):
            for b in range(c.n):
                if a != b and v[a, b] > 0:
                    fh.write(
                        f"{c.ids[a]},{c.ids[b]},{world.flows.year},{v[a, b]:.17g}\n"
                    )

    d = world.dyads
    with open(paths["dyads"], "w", encoding="utf-8") as fh:
        fh.write(
            "id_a,id_b,distance_km,contiguity,common_currency,common_language,"
            "colony,trade_agreement,common_religion,exchange_rate\n"
        )
        for b in range(c.n):
            for a in range(b + 1, c.n):
                fh.write(
                    f"{c.ids[b]},{c.ids[a]},{d.distance_km[a, b]:.17g},"
                    f"{int(d.contiguity[a, b])},{int(d.common_currency[a, b])},"
                    f"{int(d.common_language[a, b])},{int(d.colony[a, b])},"
                    f"{int(d.trade_agreement[a, b])},{int(d.common_religion[a, b])},"
                    f"{d.exchange_rate[a, b]:.17g}\n"
                )
    return paths


def _main():
    import argparse

    parser = argparse.ArgumentParser(
        description="write a synthetic trade-world CSV fixture"
    )
    parser.add_argument("outdir")
    parser.add_argument("--countries", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--year", type=int, default=2000)
    parser.add_argument("--zero-inflation", type=float, default=0.35)
    args = parser.parse_args()
    world = synthetic_world(
        args.countries, args.seed, args.year, zero_inflation=args.zero_inflation
    )
    paths = write_world_csv(world, args.outdir)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")


if __name__ == "__main__":
    _main()
