"""Analysis configuration: flat key=value file, overridable per key by CLI flags."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError

__all__ = ["AnalysisConfig", "load_config", "parse_config_text"]

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything a pipeline run needs; see README for key meanings."""

    flows: str
    countries: str
    dyads: str
    distances: str | None = None
    year: int = 2000
    symmetrization: str = "arithmetic"
    estimator: str = "zippml"
    selection: bool = False
    selection_alpha: float = 0.05
    zero_mode: str = "preserve"
    zip_prune_threshold: float = 0.5
    zero_stage_fixed_effects: bool = True
    mst_edge_universe: str = "all_pairs"
    export_top_fraction: float = 1.0
    output_dir: str = "tradenet-output"
    seed: int = 0
    reference_country: int | None = None

    def validate(self) -> "AnalysisConfig":
        for label in ("flows", "countries", "dyads"):
            value = getattr(self, label)
            if not value:
                raise ValidationError(f"config key {label!r} is required")
            if not Path(value).exists():
                raise ValidationError(f"{label} file does not exist: {value}")
        if self.distances is not None and not Path(self.distances).exists():
            raise ValidationError(f"distances file does not exist: {self.distances}")
        if self.symmetrization not in ("arithmetic", "geometric"):
            raise ValidationError(f"bad symmetrization {self.symmetrization!r}")
        if self.estimator not in ("zippml", "ppml", "ols_log"):
            raise ValidationError(f"bad estimator {self.estimator!r}")
        if not 0.0 < self.selection_alpha < 1.0:
            raise ValidationError("selection_alpha must be in (0, 1)")
        if self.zero_mode not in ("preserve", "zip_prune"):
            raise ValidationError(f"bad zero_mode {self.zero_mode!r}")
        if not 0.0 < self.zip_prune_threshold <= 1.0:
            raise ValidationError("zip_prune_threshold must be in (0, 1]")
        if self.mst_edge_universe not in ("all_pairs", "positive"):
            raise ValidationError(f"bad mst_edge_universe {self.mst_edge_universe!r}")
        if not 0.0 < self.export_top_fraction <= 1.0:
            raise ValidationError("export_top_fraction must be in (0, 1]")
        return self

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(AnalysisConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    text = raw.strip()
    if kind == "bool":
        low = text.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ValidationError(f"config key {key}: expected a boolean, got {raw!r}")
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind == "int | None":
        return None if text.lower() in ("", "none") else int(text)
    if kind == "str | None":
        return None if text.lower() in ("", "none") else text
    return text


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key=value`` lines; '#' starts a comment, blanks are skipped."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValidationError(f"{source}:{lineno}: expected key=value")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ValidationError(f"{source}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{source}:{lineno}: {exc}") from None
    return values


def load_config(path, overrides: dict | None = None) -> AnalysisConfig:
    """Config file plus CLI overrides (same key names), validated."""
    values = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        values.update(parse_config_text(text, source=str(path)))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ValidationError(f"unknown config key {key!r}")
        values[key] = value
    missing = [k for k in ("flows", "countries", "dyads") if k not in values]
    if missing:
        raise ValidationError(f"missing required config keys: {', '.join(missing)}")
    return AnalysisConfig(**values).validate()
