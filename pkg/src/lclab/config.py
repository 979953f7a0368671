"""Flat key = value experiment configuration files.

One key per line, ``#`` starts a comment, list values are comma-separated.
Example::

    experiment = deviation-curve
    family = gaussian
    n = 8
    t_grid = 0, 0.25, 0.5, 1.0
    trials = 1000000
    root_seed = 20260810
"""

from __future__ import annotations

from dataclasses import dataclass, replace, fields


class ConfigError(ValueError):
    """Configuration file could not be parsed or validated."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    family: str | None = None
    n: int | None = None
    p_list: tuple | None = None
    t_grid: tuple | None = None
    eps_grid: tuple | None = None
    trials: int | None = None
    directions: int | None = None
    restarts: int | None = None
    root_seed: int = 0
    out_path: str | None = None

    def resolved(self, **defaults) -> "ExperimentConfig":
        """Fill unset fields from experiment defaults."""
        updates = {k: v for k, v in defaults.items() if getattr(self, k) is None}
        return replace(self, **updates) if updates else self

    def require(self, *names) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(f"experiment {self.experiment!r} requires the {name!r} key")

    def params(self) -> dict:
        """Replayable parameter echo (everything except the output path)."""
        out = {}
        for f in fields(self):
            if f.name in ("out_path", "root_seed"):
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


_INT_KEYS = {"n", "trials", "directions", "restarts", "root_seed"}
_LIST_KEYS = {"p_list", "t_grid", "eps_grid"}
_STR_KEYS = {"experiment", "family", "out_path"}
_ALL_KEYS = _INT_KEYS | _LIST_KEYS | _STR_KEYS


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _STR_KEYS:
        return raw
    try:
        if key in _INT_KEYS:
            return int(raw)
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def parse_config(text: str) -> ExperimentConfig:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw)
    if "experiment" not in values:
        raise ConfigError("config must name an experiment")
    cfg = ExperimentConfig(**values)
    _validate_positive(cfg)
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text)


def config_from_params(experiment_params: dict, root_seed: int) -> ExperimentConfig:
    """Rebuild a config from a record's parameter echo (for replay)."""
    values = dict(experiment_params)
    for key in _LIST_KEYS:
        if key in values and values[key] is not None:
            values[key] = tuple(values[key])
    unknown = set(values) - _ALL_KEYS
    if unknown:
        raise ConfigError(f"record parameters contain unknown keys {sorted(unknown)}")
    cfg = ExperimentConfig(root_seed=root_seed, **values)
    _validate_positive(cfg)
    return cfg


def _validate_positive(cfg: ExperimentConfig) -> None:
    for name in ("n", "trials", "directions", "restarts"):
        value = getattr(cfg, name)
        if value is not None and value < 1:
            raise ConfigError(f"{name} must be a positive integer, got {value}")
    if cfg.root_seed < 0:
        raise ConfigError("root_seed must be non-negative")
    for name in ("p_list", "t_grid", "eps_grid"):
        grid = getattr(cfg, name)
        if grid is not None and len(grid) == 0:
            raise ConfigError(f"{name} must be non-empty when given")
