"""
Configuration: environment settings and experiment run configs.

`LackwalkSettings` holds process-wide defaults loaded from LACKWALK_*
environment variables. `RunConfig` describes one experiment; it is built by
layering a preset, a flat key-value config file and command-line flags (later
layers win) and is validated before any computation starts.
"""
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from lackwalk.experiments import ClusterSpec, FitModel, LoopWeightRule
from lackwalk.lattice import CoinFamily, CoinSpec, LatticeGeometry, build_lattice
from lackwalk.operators import MarkedSet


class ConfigError(ValueError):
    """Invalid user configuration. `field` names the offending key when known."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class LackwalkSettings(BaseSettings):
    """Process-wide defaults.

    Example:
        LACKWALK_JOBS=4 LACKWALK_LOG_FORMAT=json lackwalk sweep --preset fig2 --out results/
    """

    # Logging
    log_level: str = Field("INFO", description="Log level (DEBUG, INFO, WARNING, ERROR)")
    log_format: str = Field("text", description="Log format: 'text' or 'json'")

    # Execution
    jobs: Optional[int] = Field(None, ge=1, description="Worker processes for batch runs")

    # Search defaults
    prominence: float = Field(0.05, ge=0.0, lt=1.0, description="First-peak prominence above p(0)")
    horizon_factor: float = Field(20.0, gt=0.0, description="Horizon as a multiple of the scaling")
    points_per_decade: int = Field(25, ge=1, description="Sweep grid density without a count")

    model_config = SettingsConfigDict(
        env_prefix="LACKWALK_",
        case_sensitive=False,
    )


def load_settings() -> LackwalkSettings:
    """Settings from the environment, with validation failures reported as ConfigError."""
    try:
        return LackwalkSettings()
    except ValidationError as e:
        raise _config_error(e, prefix="LACKWALK_") from None


def resolve_jobs(flag: Optional[int], settings: LackwalkSettings) -> int:
    """--jobs, then LACKWALK_JOBS, then the machine's CPU count."""
    if flag is not None:
        if flag < 1:
            raise ConfigError("jobs must be >= 1", field="jobs")
        return flag
    if settings.jobs is not None:
        return settings.jobs
    return os.cpu_count() or 1


def _split(value: Any, sep: Optional[str]) -> Any:
    if isinstance(value, str):
        return [tok for tok in value.split(sep) if tok.strip()]
    return value


class RunConfig(BaseModel):
    """One experiment configuration; echoed verbatim into every run record."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    dimension: int
    side: int
    coin: CoinFamily = CoinFamily.G
    loop_weight: str = "0.01"
    clusters: List[str] = Field(default_factory=list)
    anchor: str = "0"
    horizon: Optional[int] = Field(None, ge=2)
    horizon_factor: float = Field(20.0, gt=0.0)
    prominence: float = Field(0.05, ge=0.0, lt=1.0)
    weights: Optional[str] = None
    points_per_decade: int = Field(25, ge=1)
    sizes: List[int] = Field(default_factory=list)
    fits: List[FitModel] = Field(default_factory=list)
    trace: Optional[str] = None
    out: Optional[str] = None
    format: str = "json"

    @model_validator(mode="before")
    @classmethod
    def _side_from_sizes(cls, data: Any) -> Any:
        # Scaling runs may omit side; the largest size stands in for it.
        if isinstance(data, dict) and data.get("side") is None and data.get("sizes"):
            sizes = _split(data["sizes"], ",")
            data = {**data, "side": max(int(s) for s in sizes)}
        return data

    @field_validator("dimension")
    @classmethod
    def _check_dimension(cls, v: int) -> int:
        if v not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        return v

    @field_validator("side")
    @classmethod
    def _check_side(cls, v: int) -> int:
        if v < 2:
            raise ValueError("side must be >= 2")
        return v

    @field_validator("coin", mode="before")
    @classmethod
    def _lower_coin(cls, v: Any) -> Any:
        return v.strip().lower() if isinstance(v, str) else v

    @field_validator("loop_weight", mode="before")
    @classmethod
    def _check_loop_weight(cls, v: Any) -> str:
        return str(LoopWeightRule.parse(v))

    @field_validator("clusters", mode="before")
    @classmethod
    def _split_clusters(cls, v: Any) -> Any:
        return _split(v, None)

    @field_validator("clusters")
    @classmethod
    def _check_clusters(cls, v: List[str]) -> List[str]:
        return [str(ClusterSpec.parse(text)) for text in v]

    @field_validator("sizes", "fits", mode="before")
    @classmethod
    def _split_lists(cls, v: Any) -> Any:
        return _split(v, ",")

    @field_validator("sizes")
    @classmethod
    def _check_sizes(cls, v: List[int]) -> List[int]:
        if any(s < 2 for s in v):
            raise ValueError("sizes must be >= 2")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("sizes must be strictly ascending")
        return v

    @field_validator("format")
    @classmethod
    def _check_format(cls, v: str) -> str:
        if v not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        return v

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        coords = self.anchor_coords
        if len(coords) != self.dimension:
            raise ValueError(f"anchor must have {self.dimension} coordinate(s)")
        for cluster in self.cluster_specs():
            if cluster.kind == "run" and self.dimension != 1:
                raise ValueError(f"cluster {cluster} needs dimension 1")
            if cluster.kind in ("block", "diag") and self.dimension != 2:
                raise ValueError(f"cluster {cluster} needs dimension 2")
        return self

    @property
    def anchor_coords(self) -> Tuple[int, ...]:
        try:
            return tuple(int(tok) for tok in self.anchor.split(","))
        except ValueError:
            raise ValueError(f"anchor must be x or x,y integers (got {self.anchor!r})") from None

    def geometry(self, side: Optional[int] = None) -> LatticeGeometry:
        return build_lattice(self.dimension, side if side is not None else self.side)

    def loop_weight_rule(self) -> LoopWeightRule:
        return LoopWeightRule.parse(self.loop_weight)

    def coin_spec(self, geometry: LatticeGeometry) -> CoinSpec:
        return CoinSpec(self.coin, self.loop_weight_rule().value(geometry.vertex_count))

    def cluster_specs(self) -> List[ClusterSpec]:
        """Configured clusters; a single vertex at the anchor when none are given."""
        if not self.clusters:
            if self.dimension == 1:
                return [ClusterSpec("run", m=1)]
            return [ClusterSpec("block", k=1, l=1)]
        return [ClusterSpec.parse(text) for text in self.clusters]

    def marked(self, geometry: LatticeGeometry, cluster: ClusterSpec) -> MarkedSet:
        return cluster.build(geometry, geometry.index(*self.anchor_coords))


_ALIASES = {"dim": "dimension", "cluster": "clusters", "fit": "fits", "size": "sizes"}


def normalize_key(key: str) -> str:
    """Flag or file key to field name: `--loop-weight` -> `loop_weight`, `cluster` -> `clusters`."""
    name = key.strip().lstrip("-").replace("-", "_").lower()
    return _ALIASES.get(name, name)


def load_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Read a flat `key = value` (or `key: value`) file; `#` starts a comment.

    Raises:
        ConfigError: If the file is missing, a line has no separator or a key repeats
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror}", field="config") from None

    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        positions = [p for p in (line.find("="), line.find(":")) if p > 0]
        if not positions:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'", field="config")
        cut = min(positions)
        key = normalize_key(line[:cut])
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}", field=key)
        values[key] = line[cut + 1 :].strip()
    return values


def _config_error(error: ValidationError, prefix: str = "") -> ConfigError:
    first = error.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or "config"
    message = first["msg"]
    if first["type"] == "extra_forbidden":
        message = "unknown key"
    elif message.startswith("Value error, "):
        message = message[len("Value error, ") :]
    name = f"{prefix}{field.upper()}" if prefix else field
    return ConfigError(f"{name}: {message}", field=field)


def build_run_config(*layers: Mapping[str, Any]) -> RunConfig:
    """Merge configuration layers (later wins, None values skipped) and validate.

    Raises:
        ConfigError: Naming the first offending field
    """
    merged: Dict[str, Any] = {}
    for layer in layers:
        for key, value in layer.items():
            if value is not None:
                merged[normalize_key(key)] = value
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        raise _config_error(e) from None
