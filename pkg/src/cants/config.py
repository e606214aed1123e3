"""Run configuration: the eight search hyperparameters plus engine extras.

Config files are flat ``key = value`` text; ``#`` starts a comment. The
radius and exploitation keys accept ``random`` to draw a fresh value per
agent from U(0.01, 0.98).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from loguru import logger

RANDOM = "random"
WEIGHT_SCHEMES = ("uniform", "kaiming", "xavier")


class ConfigError(ValueError):
    """A configuration value is missing, malformed or out of range."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class ColonyConfig:
    # search hyperparameters
    max_lag: int = 4
    num_ants: int = 30
    sensing_radius: float | None = None
    exploitation: float | None = None
    dbscan_eps: float = 0.05
    dbscan_min_pts: int = 2
    pheromone_decay: float = 0.05
    pheromone_reward: float = 0.5
    # engine extras
    population_size: int = 20
    epochs: int = 40
    horizon: int = 1
    seed: int = 0
    workers: int = 1
    max_iterations: int = 2000
    learning_rate: float = 1e-3
    grad_clip: float = 1.0
    weight_init: str = "uniform"
    pheromone_max: float = 10.0
    initial_pheromone: float = 1.0
    evict_threshold: float = 0.05
    grid_cell: float = 0.05
    split: tuple[float, float, float] = field(default=(0.7, 0.15, 0.15))

    @property
    def levels(self) -> int:
        return self.max_lag + 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        ints = ("num_ants", "dbscan_min_pts", "population_size", "epochs", "horizon", "workers", "max_iterations")
        for key in ints:
            if getattr(self, key) < 1:
                raise ConfigError(key, "must be >= 1")
        if self.max_lag < 0:
            raise ConfigError("max_lag", "must be >= 0")
        positive = (
            "dbscan_eps",
            "pheromone_decay",
            "pheromone_reward",
            "learning_rate",
            "grad_clip",
            "pheromone_max",
            "initial_pheromone",
            "evict_threshold",
            "grid_cell",
        )
        for key in positive:
            if not getattr(self, key) > 0:
                raise ConfigError(key, "must be positive")
        for key in ("sensing_radius", "exploitation"):
            value = getattr(self, key)
            if value is not None and not 0 < value < 1:
                raise ConfigError(key, f"must lie in (0, 1) or be '{RANDOM}'")
        if self.weight_init not in WEIGHT_SCHEMES:
            raise ConfigError("weight_init", f"must be one of {', '.join(WEIGHT_SCHEMES)}")
        if not self.evict_threshold < self.initial_pheromone <= self.pheromone_max:
            raise ConfigError("initial_pheromone", "must lie in (evict_threshold, pheromone_max]")
        if len(self.split) != 3 or min(self.split) <= 0 or abs(sum(self.split) - 1.0) > 1e-9:
            raise ConfigError("split", "needs three positive fractions summing to 1")

    def replace(self, **changes) -> "ColonyConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                value = RANDOM
            elif isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


def _convert(key: str, raw: str):
    types = {f.name: f.type for f in dataclasses.fields(ColonyConfig)}
    if key not in types:
        raise ConfigError(key, "unknown configuration key")
    kind = types[key]
    raw = raw.strip()
    try:
        if key in ("sensing_radius", "exploitation"):
            return None if raw.lower() == RANDOM else float(raw)
        if key == "split":
            return tuple(float(v) for v in raw.split(","))
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r}") from None


def parse_assignments(lines, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}", f"expected key = value, got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        values[key] = _convert(key, raw)
    return values


def load_config(path: str | Path | None = None, overrides: list[str] | None = None) -> ColonyConfig:
    """Build a config from an optional file plus ``key=value`` overrides.

    Keys absent from both are defaulted and each default is logged.
    """
    values = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(str(path), f"cannot read config file ({exc.strerror})") from None
        values.update(parse_assignments(text.splitlines(), str(path)))
    if overrides:
        values.update(parse_assignments(overrides, "--set"))
    for f in dataclasses.fields(ColonyConfig):
        if f.name not in values:
            default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
            logger.info("config: {} not given, using default {}", f.name, RANDOM if default is None else default)
    return ColonyConfig(**values)
