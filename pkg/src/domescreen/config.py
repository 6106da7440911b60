"""Run configuration and its flat ``key = value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    lambda_ratio: float = 0.4
    m: int = 2
    solver_tol: float = 1e-9
    lasso_tol: float = 1e-8
    margin: float = 1e-9
    seed: int = 0
    parallelism: int = 1
    dict: str | None = None
    target: str | None = None
    out: str | None = None
    # synthetic instances for gen and bench
    n: int = 50
    p: int = 500
    target_model: str = "sparse"
    atoms: int = 2
    noise: float = 0.05
    fmt: str = "raw"
    # bench
    reps: int = 5
    bench_features: int = 2

    def validate(self):
        for name in ("solver_tol", "lasso_tol", "margin"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.noise < 0:
            raise ConfigError("noise must be nonnegative")
        if not 0 < self.lambda_ratio <= 1:
            raise ConfigError("lambda_ratio must lie in (0, 1]")
        if self.m < 0:
            raise ConfigError("m must be nonnegative")
        if self.parallelism < 1 or self.reps < 1 or self.bench_features < 1:
            raise ConfigError("parallelism, reps and bench_features must be at least 1")
        if self.fmt not in ("raw", "text"):
            raise ConfigError("fmt must be raw or text")
        return self

    def updated(self, values: dict):
        return dataclasses.replace(self, **values)


FIELDS = {f.name: f for f in dataclasses.fields(Config)}


def coerce(key, text):
    field = FIELDS[key]
    kind = field.type
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None
    return text


def parse_config(text: str, source="<config>") -> dict:
    """Parse ``key = value`` lines. ``#`` starts a comment, blank lines are
    skipped and dashes in keys are read as underscores."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = coerce(key, value)
    return values


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            return parse_config(fh.read(), source=path)
    except OSError as err:
        raise ConfigError(f"{path}: {err.strerror}") from None


def dump_config(cfg: Config) -> str:
    lines = []
    for name in FIELDS:
        value = getattr(cfg, name)
        if value is not None:
            lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"
