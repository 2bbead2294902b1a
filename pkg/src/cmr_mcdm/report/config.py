from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..ingest import LocalityKey
from ..preprocess import StlParams

SEASONALITIES = ("ma", "trend")
GRANULARITIES = ("single50", "five10")
AGGREGATIONS = ("auc", "mean", "rs")
COMPARISONS = ("pareto", "epsilon", "mean_scalarized")
FORMATS = ("csv", "json", "svg")
DEFAULT_EPSILONS = (0.01, 0.05, 0.1)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    data: Path | None = None
    calendar: Path | None = None
    localities: list[LocalityKey] = field(default_factory=list)
    level: str = "region"
    seasonality: list[str] = field(default_factory=lambda: list(SEASONALITIES))
    granularity: list[str] = field(default_factory=lambda: ["single50"])
    aggregation: list[str] = field(default_factory=lambda: list(AGGREGATIONS))
    comparison: list[str] = field(default_factory=lambda: ["pareto"])
    epsilon: list[float] = field(default_factory=lambda: list(DEFAULT_EPSILONS))
    additive_epsilon: bool = False
    window_length: int = 50
    period_length: int = 10
    ma_window: int = 7
    ma_centered: bool = True
    stl_period: int = 7
    stl: StlParams = field(default_factory=StlParams)
    max_gap: int = 3
    pin_shift: float | None = None
    categories: list[str] = field(default_factory=list)
    out: Path | None = None
    formats: list[str] = field(default_factory=lambda: list(FORMATS))
    series_plots: bool = True

    def validate(self) -> None:
        if not self.localities:
            raise ConfigError("no localities requested")
        if self.level not in ("region", "country"):
            raise ConfigError(f"level must be region or country, not {self.level!r}")
        for key in self.localities:
            if key.level != self.level:
                raise ConfigError(f"locality {key} is {key.level}-level but level={self.level}")
        for name, allowed in (("seasonality", SEASONALITIES), ("granularity", GRANULARITIES),
                              ("aggregation", AGGREGATIONS), ("comparison", COMPARISONS),
                              ("formats", FORMATS)):
            values = getattr(self, name)
            if not values:
                raise ConfigError(f"{name} is empty")
            bad = [v for v in values if v not in allowed]
            if bad:
                raise ConfigError(f"unknown {name} value(s) {bad}; allowed {list(allowed)}")
        if "epsilon" in self.comparison:
            if not self.epsilon:
                raise ConfigError("epsilon comparison requested with empty epsilon list")
            if any(not e > 0 for e in self.epsilon):
                raise ConfigError("epsilon values must be positive")
        if self.window_length < 2:
            raise ConfigError("window_length must be >= 2")
        if "five10" in self.granularity and self.window_length % self.period_length:
            raise ConfigError("window_length not divisible by period_length")
        if self.ma_window < 1 or self.ma_window % 2 == 0:
            raise ConfigError("ma_window must be odd and >= 1")
        if self.max_gap < 0:
            raise ConfigError("max_gap must be >= 0")

    def to_dict(self) -> dict:
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "localities":
                v = [k.ident for k in v]
            elif f.name == "stl":
                v = asdict(v)
            elif isinstance(v, Path):
                v = str(v)
            d[f.name] = v
        return d

    def hash(self) -> str:
        """Digest of the analysis settings (paths and output options excluded)."""
        d = self.to_dict()
        for k in ("data", "calendar", "out", "formats", "series_plots"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


_LIST_FIELDS = {"seasonality", "granularity", "aggregation", "comparison", "epsilon", "formats",
                "categories", "localities"}

_ALIASES = {
    "seasonality": {"both": list(SEASONALITIES)},
    "aggregation": {"all": list(AGGREGATIONS)},
    "granularity": {"50": ["single50"], "10": ["five10"], "both": list(GRANULARITIES)},
    "comparison": {"mean": ["mean_scalarized"], "all": list(COMPARISONS)},
}


def _as_list(value) -> list:
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def normalize(name: str, value):
    """Coerce a flag or config-file value to the RunConfig field type."""
    if name in _LIST_FIELDS:
        items = _as_list(value)
        if name in _ALIASES:
            out = []
            for item in items:
                for v in _ALIASES[name].get(str(item), [str(item)]):
                    if v not in out:
                        out.append(v)
            return out
        if name == "epsilon":
            return [float(v) for v in items]
        if name == "localities":
            return [v if isinstance(v, LocalityKey) else LocalityKey.parse(str(v)) for v in items]
        return [str(v) for v in items]
    if name in ("data", "calendar", "out"):
        return None if value is None else Path(value)
    if name == "stl":
        return value if isinstance(value, StlParams) else StlParams(**(value or {}))
    if name == "pin_shift":
        return None if value is None else float(value)
    if name in ("window_length", "period_length", "ma_window", "max_gap", "stl_period"):
        return int(value)
    return value


def build_config(file_values: dict | None = None, overrides: dict | None = None,
                 base_dir: Path | None = None) -> RunConfig:
    """Merge config-file values with flag overrides (flags win)."""
    known = {f.name for f in fields(RunConfig)}
    merged = {}
    for source in (file_values or {}, overrides or {}):
        for k, v in source.items():
            k = k.replace("-", "_")
            if k not in known:
                raise ConfigError(f"unknown config key {k!r}")
            if v is not None:
                merged[k] = normalize(k, v)
    if base_dir is not None:
        for k in ("data", "calendar", "out"):
            p = merged.get(k)
            if p is not None and not p.is_absolute() and k in (file_values or {}) \
                    and k not in (overrides or {}):
                merged[k] = base_dir / p
    return RunConfig(**merged)


def load_config_file(path: Path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        values = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(values, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return values
