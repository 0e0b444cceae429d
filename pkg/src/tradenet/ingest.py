"""CSV ingestion and validation.

Fixed column layouts (see README): countries.csv carries per-country
attributes, flows.csv the directed dyadic flows with a year column, and
dyads.csv the pairwise covariates.  Errors carry the file name and the
1-based line number of the offending row.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

from .design import DyadCovariates
from .errors import IngestError
from .network import CountryTable, DirectedFlowMatrix

__all__ = [
    "EARTH_RADIUS_KM",
    "great_circle_km",
    "great_circle_matrix",
    "read_countries",
    "read_flows",
    "read_dyads",
    "ingest",
]

EARTH_RADIUS_KM = 6371.0

COUNTRY_COLUMNS = (
    "id",
    "acronym",
    "name",
    "gdp",
    "population",
    "area_km2",
    "landlocked",
    "continent",
    "region",
    "cpi",
)
FLOW_COLUMNS = ("exporter_id", "importer_id", "year", "value")
DYAD_COLUMNS = (
    "id_a",
    "id_b",
    "contiguity",
    "common_currency",
    "common_language",
    "colony",
    "trade_agreement",
    "common_religion",
    "exchange_rate",
)


def great_circle_km(lat1, lon1, lat2, lon2) -> float:
    """Great-circle distance via the haversine formula, R = 6371 km."""
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    dphi = phi2 - phi1
    dlam = np.radians(lon2) - np.radians(lon1)
    a = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2.0) ** 2
    return float(2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(a)))


def great_circle_matrix(latitude, longitude) -> np.ndarray:
    """Pairwise great-circle distances for coordinate vectors, in km."""
    phi = np.radians(np.asarray(latitude, dtype=float))
    lam = np.radians(np.asarray(longitude, dtype=float))
    dphi = phi[:, None] - phi[None, :]
    dlam = lam[:, None] - lam[None, :]
    a = (
        np.sin(dphi / 2.0) ** 2
        + np.cos(phi)[:, None] * np.cos(phi)[None, :] * np.sin(dlam / 2.0) ** 2
    )
    d = 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))
    np.fill_diagonal(d, 0.0)
    return d


def _read_csv(path, required, label):
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise IngestError(f"{label} file not found: {path}") from None
    except Exception as exc:
        raise IngestError(f"cannot parse {label} file {path}: {exc}") from None
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise IngestError(
            f"{path}: missing required columns: {', '.join(missing)}"
        )
    return frame


def _line(path, row_index):
    # +2: header line plus 1-based counting.
    return f"{path}:{row_index + 2}"


def _numeric(frame, column, path):
    converted = pd.to_numeric(frame[column], errors="coerce")
    bad = converted.isna() & frame[column].notna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise IngestError(
            f"{_line(path, row)}: non-numeric value {frame[column].iloc[row]!r} "
            f"in column {column}"
        )
    return converted.to_numpy(dtype=float)


def read_countries(path) -> CountryTable:
    frame = _read_csv(path, COUNTRY_COLUMNS, "countries")
    ids = _numeric(frame, "id", path)
    if np.any(ids != np.floor(ids)):
        raise IngestError(f"{path}: country ids must be integers")
    dup = frame["id"].duplicated()
    if dup.any():
        row = int(np.flatnonzero(dup.to_numpy())[0])
        raise IngestError(f"{_line(path, row)}: duplicate country id")

    landlocked = _numeric(frame, "landlocked", path)
    if not np.all(np.isin(landlocked[np.isfinite(landlocked)], (0.0, 1.0))):
        raise IngestError(f"{path}: landlocked must be 0 or 1")

    has_coords = "latitude" in frame.columns and "longitude" in frame.columns
    latitude = longitude = None
    if has_coords:
        latitude = _numeric(frame, "latitude", path)
        longitude = _numeric(frame, "longitude", path)
        if np.all(np.isnan(latitude)):
            latitude = longitude = None

    return CountryTable(
        ids=ids.astype(np.int64),
        acronyms=tuple(str(a) for a in frame["acronym"]),
        names=tuple(str(a) for a in frame["name"]),
        gdp=_numeric(frame, "gdp", path),
        population=_numeric(frame, "population", path),
        area=_numeric(frame, "area_km2", path),
        landlocked=landlocked == 1.0,
        continent=tuple(str(a) for a in frame["continent"]),
        region=tuple(str(a) for a in frame["region"]),
        cpi=_numeric(frame, "cpi", path),
        latitude=latitude,
        longitude=longitude,
    )


def read_flows(path, countries: CountryTable, year: int) -> DirectedFlowMatrix:
    frame = _read_csv(path, FLOW_COLUMNS, "flows")
    years = _numeric(frame, "year", path).astype(np.int64)
    if year not in set(years.tolist()):
        raise IngestError(f"{path}: no rows for year {year}")
    frame = frame.loc[years == year].reset_index(drop=False)

    position = {int(cid): k for k, cid in enumerate(countries.ids)}
    values = np.zeros((countries.n, countries.n))
    seen = set()
    exporter = _numeric(frame, "exporter_id", path).astype(np.int64)
    importer = _numeric(frame, "importer_id", path).astype(np.int64)
    value = _numeric(frame, "value", path)
    original_row = frame["index"].to_numpy()

    for k in range(len(frame)):
        where = _line(path, int(original_row[k]))
        if exporter[k] not in position:
            raise IngestError(f"{where}: unknown exporter id {exporter[k]}")
        if importer[k] not in position:
            raise IngestError(f"{where}: unknown importer id {importer[k]}")
        if exporter[k] == importer[k]:
            raise IngestError(f"{where}: self-flow for id {exporter[k]}")
        if not np.isfinite(value[k]) or value[k] < 0:
            raise IngestError(f"{where}: flow value must be nonnegative")
        pair = (int(exporter[k]), int(importer[k]))
        if pair in seen:
            raise IngestError(
                f"{where}: duplicate flow for {pair[0]}->{pair[1]} in year {year}"
            )
        seen.add(pair)
        values[position[pair[0]], position[pair[1]]] = value[k]

    return DirectedFlowMatrix(values=values, year=year)


def _distance_fallback(countries: CountryTable) -> np.ndarray:
    if countries.has_coordinates():
        return great_circle_matrix(countries.latitude, countries.longitude)
    return np.full((countries.n, countries.n), np.nan)


def read_dyads(
    path, countries: CountryTable, distance_path=None
) -> DyadCovariates:
    """Read pairwise covariates; distances fall back to great-circle values.

    Distance resolution order: explicit ``distance_path`` file, then the
    ``distance_km`` column of the dyad file, then coordinates.
    """
    frame = _read_csv(path, DYAD_COLUMNS, "dyads")
    position = {int(cid): k for k, cid in enumerate(countries.ids)}
    n = countries.n

    distance = _distance_fallback(countries)
    mats = {
        name: np.full((n, n), np.nan)
        for name in (
            "contiguity",
            "common_currency",
            "common_language",
            "colony",
            "trade_agreement",
            "common_religion",
            "exchange_rate",
        )
    }
    for name in mats:
        np.fill_diagonal(mats[name], 0.0)

    has_distance_col = "distance_km" in frame.columns
    dist_col = _numeric(frame, "distance_km", path) if has_distance_col else None
    id_a = _numeric(frame, "id_a", path).astype(np.int64)
    id_b = _numeric(frame, "id_b", path).astype(np.int64)
    cols = {name: _numeric(frame, name, path) for name in DYAD_COLUMNS[2:]}

    seen = set()
    for k in range(len(frame)):
        where = _line(path, k)
        if id_a[k] not in position:
            raise IngestError(f"{where}: unknown id {id_a[k]}")
        if id_b[k] not in position:
            raise IngestError(f"{where}: unknown id {id_b[k]}")
        if id_a[k] >= id_b[k]:
            raise IngestError(f"{where}: dyad rows need id_a < id_b")
        pair = (int(id_a[k]), int(id_b[k]))
        if pair in seen:
            raise IngestError(f"{where}: duplicate dyad {pair}")
        seen.add(pair)
        a, b = position[pair[0]], position[pair[1]]
        for name in mats:
            if name == "exchange_rate":
                continue
            v = cols[name][k]
            if np.isfinite(v) and v not in (0.0, 1.0):
                raise IngestError(f"{where}: column {name} must be 0 or 1")
        for name in mats:
            mats[name][a, b] = mats[name][b, a] = cols[name][k]
        if dist_col is not None and np.isfinite(dist_col[k]):
            distance[a, b] = distance[b, a] = dist_col[k]

    if distance_path is not None:
        dframe = _read_csv(distance_path, ("id_a", "id_b", "distance_km"), "distances")
        da = _numeric(dframe, "id_a", distance_path).astype(np.int64)
        db = _numeric(dframe, "id_b", distance_path).astype(np.int64)
        dv = _numeric(dframe, "distance_km", distance_path)
        for k in range(len(dframe)):
            where = _line(distance_path, k)
            if da[k] not in position or db[k] not in position:
                raise IngestError(f"{where}: unknown country id")
            a, b = position[int(da[k])], position[int(db[k])]
            distance[a, b] = distance[b, a] = dv[k]

    np.fill_diagonal(distance, 0.0)
    return DyadCovariates(distance_km=distance, **mats)


def ingest(config):
    """Load and cross-validate the three input files named by the config.

    Returns (CountryTable, DirectedFlowMatrix, DyadCovariates).
    """
    countries = read_countries(config.countries)
    flows = read_flows(config.flows, countries, config.year)
    dyads = read_dyads(config.dyads, countries, distance_path=config.distances)
    return countries, flows, dyads
