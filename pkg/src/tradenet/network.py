"""Core network containers and transforms.

Everything downstream (topology, gravity fitting, spanning trees) works on
the types defined here: a per-country attribute table, the raw directed
flow matrix for one year, and the symmetric normalized weight matrix
derived from it (original or residual).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "CountryTable",
    "DirectedFlowMatrix",
    "WeightedNetwork",
    "AdjacencyView",
    "symmetrize",
    "adjacency",
    "density",
    "assemble_residual_network",
]


@dataclass(frozen=True)
class CountryTable:
    """Per-country attributes, in a fixed order that every matrix indexes against.

    ``latitude``/``longitude`` may be ``None`` when a pairwise distance file
    is supplied instead of coordinates.
    """

    ids: np.ndarray
    acronyms: tuple
    names: tuple
    gdp: np.ndarray
    population: np.ndarray
    area: np.ndarray
    landlocked: np.ndarray
    continent: tuple
    region: tuple
    cpi: np.ndarray
    latitude: np.ndarray | None = None
    longitude: np.ndarray | None = None

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        object.__setattr__(self, "ids", ids)
        n = ids.size
        if len(set(ids.tolist())) != n:
            raise ValidationError("country ids must be unique")
        for name in ("gdp", "population", "area", "cpi"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValidationError(f"{name} must have one entry per country")
            object.__setattr__(self, name, arr)
        object.__setattr__(
            self, "landlocked", np.asarray(self.landlocked, dtype=bool)
        )
        if self.landlocked.shape != (n,):
            raise ValidationError("landlocked must have one entry per country")
        for name in ("acronyms", "names", "continent", "region"):
            seq = tuple(getattr(self, name))
            if len(seq) != n:
                raise ValidationError(f"{name} must have one entry per country")
            object.__setattr__(self, name, seq)
        for name in ("latitude", "longitude"):
            val = getattr(self, name)
            if val is not None:
                arr = np.asarray(val, dtype=float)
                if arr.shape != (n,):
                    raise ValidationError(f"{name} must have one entry per country")
                object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.ids.size

    @property
    def per_capita_gdp(self) -> np.ndarray:
        return self.gdp / self.population

    def position_of(self, country_id: int) -> int:
        """Index of ``country_id`` in the table order."""
        hits = np.flatnonzero(self.ids == country_id)
        if hits.size == 0:
            raise KeyError(f"unknown country id {country_id}")
        return int(hits[0])

    def has_coordinates(self) -> bool:
        return self.latitude is not None and self.longitude is not None


@dataclass(frozen=True)
class DirectedFlowMatrix:
    """Raw directed flows for one year: entry (i, j) is exports from i to j."""

    values: np.ndarray
    year: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValidationError("flow matrix must be square")
        if not np.all(np.isfinite(values)):
            raise ValidationError("flow matrix entries must be finite")
        if np.any(values < 0):
            raise ValidationError("flow matrix entries must be nonnegative")
        if np.any(np.diagonal(values) != 0):
            raise ValidationError("flow matrix diagonal must be zero")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class WeightedNetwork:
    """Symmetric weight matrix normalized to [0, 1].

    ``normalizer`` is the pre-normalization maximum, so absolute flows are
    recoverable as ``weights * normalizer``.  ``degenerate`` flags the
    all-zero case where no normalization was possible.
    """

    weights: np.ndarray
    kind: str = "original"
    normalizer: float = 1.0
    degenerate: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValidationError("weight matrix must be square")
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite")
        if not np.array_equal(w, w.T):
            raise ValidationError("weight matrix must be symmetric")
        if np.any(np.diagonal(w) != 0):
            raise ValidationError("weight matrix diagonal must be zero")
        if np.any(w < 0) or np.any(w > 1):
            raise ValidationError("weights must lie in [0, 1]")
        if np.any(w > 0) and w.max() != 1.0:
            raise ValidationError("a nonempty network must have maximum weight 1")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def flows(self) -> np.ndarray:
        """Pre-normalization magnitudes, ``weights * normalizer``."""
        return self.weights * self.normalizer


@dataclass(frozen=True)
class AdjacencyView:
    """Boolean projection of a weighted network at a weight cutoff."""

    bits: np.ndarray
    threshold: float = 0.0

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        bits = bits.copy()
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    @property
    def n(self) -> int:
        return self.bits.shape[0]


def _normalized(matrix: np.ndarray, kind: str, meta: dict | None = None) -> WeightedNetwork:
    """Divide by the matrix maximum, flagging the all-zero case instead of erroring."""
    peak = float(matrix.max()) if matrix.size else 0.0
    if peak <= 0.0:
        return WeightedNetwork(
            np.zeros_like(matrix), kind=kind, normalizer=0.0, degenerate=True,
            meta=meta or {},
        )
    return WeightedNetwork(matrix / peak, kind=kind, normalizer=peak, meta=meta or {})


def symmetrize(flows: DirectedFlowMatrix, mode: str = "arithmetic") -> WeightedNetwork:
    """Collapse directed flows into a symmetric normalized weight matrix.

    Parameters
    ----------
    flows : DirectedFlowMatrix
        Raw directed flows; entry (i, j) is exports from i to j.
    mode : {"arithmetic", "geometric"}
        ``arithmetic`` averages the two directions of each pair;
        ``geometric`` takes the square root of their product (so a pair with
        flow in only one direction gets weight zero).

    Returns
    -------
    WeightedNetwork
        Entries rescaled by the matrix maximum, which is recorded as
        ``normalizer``.  An all-zero input yields a degenerate-flagged
        network with ``normalizer`` 0 instead of an error.
    """
    v = flows.values
    if mode == "arithmetic":
        sym = (v + v.T) / 2.0
    elif mode == "geometric":
        sym = np.sqrt(v * v.T)
    else:
        raise ValidationError(f"unknown symmetrization mode {mode!r}")
    return _normalized(sym, kind="original", meta={"symmetrization": mode})


def adjacency(net: WeightedNetwork, threshold: float = 0.0) -> AdjacencyView:
    """Boolean view with an edge wherever the weight exceeds ``threshold``."""
    if threshold < 0:
        raise ValidationError("threshold must be nonnegative")
    bits = net.weights > threshold
    np.fill_diagonal(bits, False)
    return AdjacencyView(bits, threshold=float(threshold))


def density(net: WeightedNetwork) -> float:
    """Fraction of the n(n-1)/2 possible links with positive weight."""
    n = net.n
    if n < 2:
        raise ValidationError("density needs at least 2 nodes")
    iu = np.triu_indices(n, k=1)
    positive = int(np.count_nonzero(net.weights[iu] > 0))
    return positive / (n * (n - 1) / 2)


def assemble_residual_network(
    fit,
    net: WeightedNetwork,
    zero_mode: str = "preserve",
    prune_threshold: float | None = None,
) -> WeightedNetwork:
    """Re-weight links with the gravity-fit residuals.

    Each estimated dyad (i, j) gets weight ``fit.residuals`` (observed over
    fitted flow; already 0 for zero-flow dyads), the matrix is symmetrized,
    and entries are rescaled by their maximum.

    Parameters
    ----------
    fit : GravityFit
        Must come from a design built on the same country index as ``net``.
    net : WeightedNetwork
        The original network the fit explained.
    zero_mode : {"preserve", "zip_prune"}
        ``preserve`` keeps zero flows as zero links.  ``zip_prune``
        additionally zeroes dyads whose estimated zero-stage probability
        exceeds ``prune_threshold``.
    prune_threshold : float, optional
        Probability cutoff for ``zip_prune`` mode.
    """
    n = net.n
    if fit.n_countries != n:
        raise ValidationError(
            f"fit built for {fit.n_countries} countries, network has {n}"
        )
    if zero_mode not in ("preserve", "zip_prune"):
        raise ValidationError(f"unknown zero_mode {zero_mode!r}")

    eta = np.asarray(fit.residuals, dtype=float)
    di = np.asarray(fit.dyad_i)
    dj = np.asarray(fit.dyad_j)

    if zero_mode == "zip_prune":
        if fit.zero_probabilities is None:
            raise ValidationError("zip_prune needs a fit with a zero stage")
        if prune_threshold is None or not 0.0 < prune_threshold <= 1.0:
            raise ValidationError("zip_prune needs a prune_threshold in (0, 1]")
        eta = np.where(fit.zero_probabilities > prune_threshold, 0.0, eta)

    e = np.zeros((n, n))
    e[di, dj] = eta
    e[dj, di] = eta

    n_dyads = n * (n - 1) // 2
    missing = n_dyads - di.size
    meta = {"zero_mode": zero_mode}
    if zero_mode == "zip_prune":
        meta["prune_threshold"] = prune_threshold
    if missing:
        meta["missing_dyads"] = missing
    return _normalized(e, kind="residual", meta=meta)
