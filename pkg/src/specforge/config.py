"""Run configuration: defaults, file loading, CLI merging.

A config file is a flat TOML document whose keys mirror RunConfig field
names (``run.toml`` style).  A ``run_manifest.json`` written by a previous
run is also accepted: its embedded ``config`` object is used, which makes
re-running from a manifest reproduce the original outputs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

PROVINCE = "province"
REGION = "region"
LEVELS = (PROVINCE, REGION)

AII_INCLUSIVE = "inclusive"
AII_LEAVE_ONE_OUT = "leave_one_out"
AII_MODES = (AII_INCLUSIVE, AII_LEAVE_ONE_OUT)

BASIS_STRENGTH = "strength"
BASIS_PUB_COUNT = "pub_count"
AI_BASES = (BASIS_STRENGTH, BASIS_PUB_COUNT)

DEFAULT_DOC_TYPES = ("article", "review", "proceeding_paper", "letter")

WORKERS_ENV_VAR = "SPECFORGE_WORKERS"


@dataclass(frozen=True)
class BandConfig:
    """Qualitative band edges applied to a specialization index value.

    ``expected_half_width`` bounds the "expected" band around zero and
    ``extreme_edge`` separates the plain from the extreme bands:
    (extreme, 100] highly specialized, (expected, extreme] specialized,
    [-expected, expected] expected, [-extreme, -expected) de-specialized,
    [-100, -extreme) strongly de-specialized.
    """

    expected_half_width: float = 10.0
    extreme_edge: float = 50.0

    def validate(self) -> None:
        if not (0 <= self.expected_half_width < self.extreme_edge <= 100):
            raise ConfigError(
                "band edges must satisfy 0 <= expected_half_width < "
                f"extreme_edge <= 100, got {self.expected_half_width}/{self.extreme_edge}"
            )


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs, in one declarative object."""

    pubs_path: str = ""
    orgs_path: str = ""
    territories_path: str = ""
    taxonomy_path: str = ""
    out_dir: str = "out"

    levels: tuple[str, ...] = LEVELS
    aii_mode: str = AII_INCLUSIVE
    ai_basis: str = BASIS_STRENGTH
    doc_types: tuple[str, ...] = DEFAULT_DOC_TYPES

    threshold_region: int = 10
    threshold_province: int = 1

    expected_band: float = 10.0
    extreme_band: float = 50.0
    high_cut: float = 50.0
    low_cut: float = -50.0

    top_k: int = 3
    decimals: int = 1
    workers: int = 1
    seed: int = 0

    census_date: str = "unspecified"
    year_start: int | None = None
    year_end: int | None = None

    radar_scs: tuple[str, ...] = ()
    map_scs: tuple[str, ...] = ()
    dump_impacts: bool = False

    @property
    def bands(self) -> BandConfig:
        return BandConfig(self.expected_band, self.extreme_band)

    def threshold_for(self, level: str) -> int:
        return self.threshold_region if level == REGION else self.threshold_province

    def validate(self) -> None:
        if self.threshold_region < 1 or self.threshold_province < 1:
            raise ConfigError("activity thresholds must be >= 1")
        if self.high_cut <= self.low_cut:
            raise ConfigError("high_cut must be greater than low_cut")
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if self.decimals < 0:
            raise ConfigError("decimals must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.aii_mode not in AII_MODES:
            raise ConfigError(f"aii_mode must be one of {AII_MODES}")
        if self.ai_basis not in AI_BASES:
            raise ConfigError(f"ai_basis must be one of {AI_BASES}")
        for level in self.levels:
            if level not in LEVELS:
                raise ConfigError(f"unknown level {level!r}")
        if not self.levels:
            raise ConfigError("at least one level is required")
        if not self.doc_types:
            raise ConfigError("doc_types must not be empty")
        if (
            self.year_start is not None
            and self.year_end is not None
            and self.year_start > self.year_end
        ):
            raise ConfigError("year_start must not exceed year_end")
        self.bands.validate()

    def year_window(self) -> tuple[int | None, int | None]:
        return (self.year_start, self.year_end)

    def echo(self) -> dict:
        """JSON-safe mapping of every field, for output headers and manifests."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out


_TUPLE_FIELDS = {"levels", "doc_types", "radar_scs", "map_scs"}
_FIELD_TYPES = {f.name: f for f in fields(RunConfig)}


def config_from_mapping(mapping: dict, base: RunConfig | None = None) -> RunConfig:
    """Build a RunConfig from a flat mapping, rejecting unknown keys."""
    base = base or RunConfig()
    updates = {}
    for key, value in mapping.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        if key in _TUPLE_FIELDS:
            if isinstance(value, str):
                value = [v.strip() for v in value.split(",") if v.strip()]
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"config key {key!r} expects a list")
            value = tuple(str(v) for v in value)
        updates[key] = value
    try:
        cfg = replace(base, **updates)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def read_config_mapping(path: str | Path) -> dict:
    """Raw key/value mapping from a flat TOML config or a run_manifest.json."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    data = path.read_bytes()
    if path.suffix == ".json" or data.lstrip()[:1] == b"{":
        obj = json.loads(data.decode("utf-8"))
        if "config" in obj and isinstance(obj["config"], dict):
            obj = obj["config"]
        mapping = obj
    else:
        try:
            mapping = tomllib.loads(data.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid config file {path}: {exc}") from exc
    # None round-trips as null in JSON but TOML has no null; absent keys stay default.
    return {k: v for k, v in mapping.items() if v is not None}


def load_config_file(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Read a config file and apply it over ``base``."""
    return config_from_mapping(read_config_mapping(path), base)


def resolve_workers(cli_value: int | None, file_value: int | None = None) -> int:
    """Worker count priority: CLI flag, config file, env var, default 1."""
    if cli_value is not None:
        return cli_value
    if file_value is not None:
        return file_value
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer, got {env!r}") from exc
    return 1
