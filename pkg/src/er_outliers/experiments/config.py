"""Flat ``key=value`` experiment configuration with command-line overrides."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "correspond"
    n: int = 2000
    d: float | None = None
    b: float | None = None
    kappa: float = 0.25
    theta: float = 0.5
    tau: float = 2.0
    trials: int = 1
    seed: int = 0
    tol: float = 1e-3
    max_basis: int = 800
    extra_pairs: int = 5
    law: str = "rademacher"
    workers: int = 1
    dense_check_n: int = 0
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")
        if (self.d is None) == (self.b is None):
            raise ConfigError("exactly one of d and b must be given")
        if self.b is not None and not self.b > 0:
            raise ConfigError("b must be positive")
        if self.d is not None and not 0 < self.d <= self.n:
            raise ConfigError(f"d must lie in (0, n], got {self.d}")
        if not 0 < self.kappa < 0.5:
            raise ConfigError(f"kappa must lie in (0, 1/2), got {self.kappa}")
        if not 0 < self.theta <= 0.5:
            raise ConfigError(f"theta must lie in (0, 1/2], got {self.theta}")
        if not self.tau > 1:
            raise ConfigError(f"tau must exceed 1, got {self.tau}")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.extra_pairs < 1:
            raise ConfigError("extra_pairs must be positive")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")

    @property
    def degree(self) -> float:
        """Expected degree, resolving ``b`` as ``b log n``."""
        return self.d if self.d is not None else self.b * math.log(self.n)

    def as_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, raw: str) -> Any:
    if key not in _TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _TYPES[key]
    if raw.lower() in ("none", "") and "None" in kind:
        return None
    try:
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw


def parse_config_text(text: str, source: str = "<text>") -> dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, Any] = {}
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{no}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        out[key] = _coerce(key, val)
    return out


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None,
                **defaults: Any) -> ExperimentConfig:
    """File values override ``defaults``; non-None ``overrides`` win over both."""
    values: dict[str, Any] = dict(defaults)
    layers: list[dict[str, Any]] = []
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        layers.append(parse_config_text(text, str(p)))
    layers.append({k: v for k, v in (overrides or {}).items() if v is not None})
    for layer in layers:
        # a later layer naming d or b replaces the other one
        if "d" in layer and "b" not in layer:
            values.pop("b", None)
        elif "b" in layer and "d" not in layer:
            values.pop("d", None)
        values.update(layer)
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def with_overrides(cfg: ExperimentConfig, **changes: Any) -> ExperimentConfig:
    return replace(cfg, **changes)
