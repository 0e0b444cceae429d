"""Regressor assembly for the gravity equation.

Builds the dyad-level design matrix: logged size and distance terms,
country-level controls entering once per endpoint role, link dummies, and
merged per-country fixed-effect columns.  Dyads are unordered; the "i"
role is the endpoint with the higher position in the country table.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .network import CountryTable, WeightedNetwork

__all__ = [
    "DyadCovariates",
    "CovariateSet",
    "compute_remoteness",
    "build_design",
]

# Dyad-level dummy columns, in design order: (column name, attribute name).
_LINK_DUMMIES = (
    ("ctg", "contiguity"),
    ("comc", "common_currency"),
    ("coml", "common_language"),
    ("col", "colony"),
    ("ta", "trade_agreement"),
    ("comr", "common_religion"),
)


@dataclass(frozen=True)
class DyadCovariates:
    """Symmetric per-pair regressors; NaN marks a missing value.

    Dummies are 0/1 floats so missingness can be represented; exchange
    rate is a precomputed pass-through column (no dyadic transform is
    applied to it here).
    """

    distance_km: np.ndarray
    contiguity: np.ndarray
    common_currency: np.ndarray
    common_language: np.ndarray
    colony: np.ndarray
    trade_agreement: np.ndarray
    common_religion: np.ndarray
    exchange_rate: np.ndarray

    def __post_init__(self):
        n = None
        for f in dataclasses.fields(self):
            arr = np.asarray(getattr(self, f.name), dtype=float)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValidationError(f"{f.name} must be a square matrix")
            if n is None:
                n = arr.shape[0]
            elif arr.shape[0] != n:
                raise ValidationError("dyad covariate matrices disagree on size")
            with np.errstate(invalid="ignore"):
                if not np.array_equal(arr, arr.T, equal_nan=True):
                    raise ValidationError(f"{f.name} must be symmetric")
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, f.name, arr)

    @property
    def n(self) -> int:
        return self.distance_km.shape[0]


@dataclass(frozen=True)
class CovariateSet:
    """Design matrix over the n(n-1)/2 unordered dyads (minus rejections).

    ``blocks`` maps a droppable regressor group (e.g. ``gdp`` covers the
    two role columns) to its column indices; fixed-effect columns live in
    the reserved ``fe`` block, which model selection never touches.
    ``rejected`` lists (i, j, reason) for dyads excluded from estimation.
    """

    X: np.ndarray
    columns: tuple
    blocks: dict
    response: np.ndarray
    dyad_i: np.ndarray
    dyad_j: np.ndarray
    n_countries: int
    country_ids: np.ndarray | None = None
    rejected: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.response, dtype=float)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ValidationError("design matrix and response sizes disagree")
        if len(self.columns) != X.shape[1]:
            raise ValidationError("column names and matrix width disagree")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "response", y)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n_dyads(self) -> int:
        return self.X.shape[0]

    @property
    def fe_mask(self) -> np.ndarray:
        mask = np.zeros(len(self.columns), dtype=bool)
        mask[list(self.blocks.get("fe", ()))] = True
        return mask

    @property
    def droppable_blocks(self) -> tuple:
        return tuple(b for b in self.blocks if b not in ("fe", "const"))

    def drop_blocks(self, names) -> "CovariateSet":
        """New design without the named regressor blocks."""
        names = set(names)
        unknown = names - set(self.blocks)
        if unknown:
            raise ValidationError(f"unknown blocks: {', '.join(sorted(unknown))}")
        if "fe" in names or "const" in names:
            raise ValidationError("fixed effects and the constant cannot be dropped")
        drop_cols = set()
        for b in names:
            drop_cols.update(self.blocks[b])
        keep = [k for k in range(len(self.columns)) if k not in drop_cols]
        remap = {old: new for new, old in enumerate(keep)}
        blocks = {
            b: tuple(remap[c] for c in cols)
            for b, cols in self.blocks.items()
            if b not in names
        }
        return dataclasses.replace(
            self,
            X=self.X[:, keep],
            columns=tuple(self.columns[k] for k in keep),
            blocks=blocks,
        )

    def subset_rows(self, mask) -> "CovariateSet":
        """New design restricted to the dyads flagged in ``mask``."""
        mask = np.asarray(mask, dtype=bool)
        return dataclasses.replace(
            self,
            X=self.X[mask],
            response=self.response[mask],
            dyad_i=self.dyad_i[mask],
            dyad_j=self.dyad_j[mask],
        )

    @classmethod
    def from_matrix(cls, X, columns, response, fe_columns=()) -> "CovariateSet":
        """Wrap a plain matrix as a design (each column its own block).

        Convenience constructor for direct estimator use outside the
        dyadic pipeline; dyad indices are filled with placeholders.
        """
        X = np.asarray(X, dtype=float)
        columns = tuple(columns)
        fe = set(fe_columns)
        blocks = {}
        fe_idx = []
        for k, name in enumerate(columns):
            if name in fe:
                fe_idx.append(k)
            else:
                blocks[name] = (k,)
        if fe_idx:
            blocks["fe"] = tuple(fe_idx)
        m = X.shape[0]
        return cls(
            X=X,
            columns=columns,
            blocks=blocks,
            response=np.asarray(response, dtype=float),
            dyad_i=np.zeros(m, dtype=np.intp),
            dyad_j=np.zeros(m, dtype=np.intp),
            n_countries=0,
        )


def compute_remoteness(countries: CountryTable, dist: np.ndarray) -> np.ndarray:
    """GDP-share-weighted average distance of each country to all others.

    The weights renormalize over the other countries' GDPs (own GDP
    excluded), so with two countries both remoteness values equal their
    mutual distance.
    """
    n = countries.n
    if n < 2:
        raise ValidationError("remoteness needs at least two countries")
    dist = np.asarray(dist, dtype=float)
    if dist.shape != (n, n):
        raise ValidationError("distance matrix size mismatch")
    off = ~np.eye(n, dtype=bool)
    if np.any(~np.isfinite(dist[off])) or np.any(dist[off] <= 0):
        raise ValidationError("off-diagonal distances must be positive")
    gdp = countries.gdp
    if np.any(~np.isfinite(gdp)) or np.any(gdp <= 0):
        raise ValidationError("remoteness needs positive GDPs")

    rm = np.empty(n)
    total = gdp.sum()
    for i in range(n):
        others = total - gdp[i]
        shares = gdp / others
        shares[i] = 0.0
        rm[i] = float(np.dot(shares, dist[i]))
    return rm


def _remoteness_tolerating_missing(gdp, dist) -> np.ndarray:
    """Remoteness over the countries with usable GDPs and distances.

    Countries with invalid own data get NaN (their dyads are rejected
    anyway); valid countries average over the other valid ones, so one bad
    record does not poison the whole column.
    """
    gdp = np.asarray(gdp, dtype=float)
    n = gdp.size
    with np.errstate(invalid="ignore"):
        gdp_ok = np.isfinite(gdp) & (gdp > 0)
        dist_ok = np.isfinite(dist) & (dist > 0)
    rm = np.full(n, np.nan)
    for i in range(n):
        if not gdp_ok[i]:
            continue
        others = gdp_ok & dist_ok[i]
        others[i] = False
        if not others.any():
            continue
        shares = gdp[others] / gdp[others].sum()
        rm[i] = float(np.dot(shares, dist[i, others]))
    return rm


def _role_columns(values, di, dj, name, columns, data, block, blocks):
    """Append the i-role and j-role columns of a country-level variable."""
    start = len(columns)
    columns.extend([f"{name}_i", f"{name}_j"])
    data.append(values[di])
    data.append(values[dj])
    blocks[block] = blocks.get(block, ()) + (start, start + 1)


def build_design(
    countries: CountryTable,
    dyad_covariates: DyadCovariates,
    response: WeightedNetwork,
    *,
    include_fixed_effects: bool = True,
    reference_country: int | None = None,
    remoteness: np.ndarray | None = None,
) -> CovariateSet:
    """Assemble the gravity design from a country table, dyad covariates, and a network.

    The response is the pre-normalization symmetric flow of each dyad
    (``response.flows``), not the [0, 1] weight: the estimator is scale
    equivariant, and raw units keep magnitudes interpretable.

    Dyads with any missing ingredient (country attribute, distance, dummy)
    are dropped and listed in ``rejected`` with a reason; values that must
    be logged (GDP, distance, area, population) reject the dyad when
    nonpositive.  Continent dummies drop their first level per role; one
    merged fixed-effect column per country is emitted, minus the reference
    country (the first in table order unless ``reference_country`` names
    another id).
    """
    n = countries.n
    if dyad_covariates.n != n or response.n != n:
        raise ValidationError("country table, covariates and network sizes disagree")

    di, dj = np.tril_indices(n, k=-1)
    flows = response.flows[di, dj]

    if remoteness is None:
        remoteness = _remoteness_tolerating_missing(
            countries.gdp, dyad_covariates.distance_km
        )
    else:
        remoteness = np.asarray(remoteness, dtype=float)

    # Per-country validity: attributes that must be positive under a log.
    bad_country_reason = {}
    for k in range(n):
        problems = []
        for label, val in (
            ("gdp", countries.gdp[k]),
            ("population", countries.population[k]),
            ("area", countries.area[k]),
        ):
            if not np.isfinite(val) or val <= 0:
                problems.append(label)
        if not np.isfinite(countries.cpi[k]):
            problems.append("cpi")
        if not np.isfinite(remoteness[k]):
            problems.append("remoteness")
        if problems:
            bad_country_reason[k] = (
                f"missing attributes for {countries.acronyms[k]}: "
                + ", ".join(problems)
            )

    dist = dyad_covariates.distance_km[di, dj]
    dummies = {
        name: getattr(dyad_covariates, attr)[di, dj]
        for name, attr in _LINK_DUMMIES
    }
    exc = dyad_covariates.exchange_rate[di, dj]

    keep = np.ones(di.size, dtype=bool)
    rejected = []
    for d in range(di.size):
        a, b = int(di[d]), int(dj[d])
        reason = bad_country_reason.get(a) or bad_country_reason.get(b)
        if reason is None:
            if not np.isfinite(dist[d]) or dist[d] <= 0:
                reason = "missing or nonpositive distance"
            elif not np.isfinite(exc[d]):
                reason = "missing exchange rate"
            else:
                for name in dummies:
                    if not np.isfinite(dummies[name][d]):
                        reason = f"missing {name} dummy"
                        break
        if reason is not None:
            keep[d] = False
            rejected.append((a, b, reason))

    di, dj = di[keep], dj[keep]
    flows = flows[keep]
    dist = dist[keep]
    exc = exc[keep]
    dummies = {name: col[keep] for name, col in dummies.items()}

    if di.size == 0:
        raise ValidationError("no estimable dyads remain after rejection")

    columns: list = []
    data: list = []
    blocks: dict = {}

    if not include_fixed_effects:
        # With fixed effects the constant is absorbed (and the dummy trap
        # forbids it); without them the multiplicative level needs one.
        blocks["const"] = (0,)
        columns.append("const")
        data.append(np.ones(di.size))

    # Bad-country entries never reach a retained dyad; silence their logs.
    with np.errstate(divide="ignore", invalid="ignore"):
        log_gdp = np.log(countries.gdp)
        log_area = np.log(countries.area)
        log_pop = np.log(countries.population)

    _role_columns(log_gdp, di, dj, "log_gdp", columns, data, "gdp", blocks)
    blocks["dist"] = (len(columns),)
    columns.append("log_dist")
    data.append(np.log(dist))
    _role_columns(log_area, di, dj, "log_area", columns, data, "area", blocks)
    _role_columns(log_pop, di, dj, "log_pop", columns, data, "pop", blocks)
    _role_columns(countries.cpi, di, dj, "cpi", columns, data, "cpi", blocks)
    blocks["exc"] = (len(columns),)
    columns.append("exc")
    data.append(exc)
    _role_columns(remoteness, di, dj, "rm", columns, data, "rm", blocks)
    _role_columns(
        countries.landlocked.astype(float), di, dj, "ll", columns, data, "ll", blocks
    )

    # Continent dummies per role, first level dropped for identification.
    levels = sorted(set(countries.continent))
    if len(levels) > 1:
        codes = np.array([levels.index(c) for c in countries.continent])
        cont_cols = ()
        for level_idx, level in enumerate(levels[1:], start=1):
            for role, idx in (("i", di), ("j", dj)):
                cont_cols += (len(columns),)
                columns.append(f"cont_{role}_{level}")
                data.append((codes[idx] == level_idx).astype(float))
        blocks["cont"] = cont_cols

    for name, _ in _LINK_DUMMIES:
        blocks[name] = (len(columns),)
        columns.append(name)
        data.append(dummies[name])

    if include_fixed_effects:
        if reference_country is None:
            ref_pos = 0
        else:
            ref_pos = countries.position_of(reference_country)
        fe_cols = ()
        for k in range(n):
            if k == ref_pos:
                continue
            fe_cols += (len(columns),)
            columns.append(f"fe_{countries.acronyms[k]}")
            data.append(((di == k) | (dj == k)).astype(float))
        blocks["fe"] = fe_cols

    X = np.column_stack(data)
    return CovariateSet(
        X=X,
        columns=tuple(columns),
        blocks=blocks,
        response=flows,
        dyad_i=di,
        dyad_j=dj,
        n_countries=n,
        country_ids=countries.ids.copy(),
        rejected=tuple(rejected),
        meta={
            "response": "pre-normalization symmetric flows",
            "fixed_effects": include_fixed_effects,
        },
    )
