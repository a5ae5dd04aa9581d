"""Flat ``key = value`` run configuration shared by all CLI commands."""

import math
from dataclasses import dataclass, fields, replace

from corrhub.detect import ONE_SIDED, DetectorConfig


class ConfigError(ValueError):
    pass


def _opt_int(text):
    return None if text.lower() in ("none", "") else int(text)


def _gamma(text):
    return math.inf if text.lower() in ("inf", "infinity", "none") else int(text)


def _thresholds(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _fmt(value):
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    return str(value)


@dataclass(frozen=True)
class RunConfig:
    n: int = 10
    p: int | None = None
    a_u: float = 5.0
    a_v: float = 5.0
    eps_u: float = 1.0
    eps_v: float = 1.0
    q: int = 10
    window: int | None = None
    sidedness: str = ONE_SIDED
    gamma: float = 1
    paths: int = 1000
    seed: int = 0
    input: str = ""
    output: str = ""
    thresholds: tuple = (1.0, 2.0, 3.0, 4.0, 5.0)
    scenario: str = ""
    j: int = 5
    dof: int | None = None
    diag_boost: float = 0.0
    calib_batches: int = 1000
    delay_paths: int = 500
    mfa_paths: int = 1500
    cap: int = 100_000
    workers: int = 1
    batches: int = 10_000
    mean_shift: float = 0.0

    def __post_init__(self):
        if self.n <= 4:
            raise ConfigError(f"n must exceed 4, got {self.n}")
        if self.p is not None and self.p < 2:
            raise ConfigError(f"p must be at least 2, got {self.p}")
        if any(t <= 0 for t in self.thresholds):
            raise ConfigError("thresholds must be positive")
        if self.paths < 1 or self.calib_batches < 1 or self.batches < 1 or self.cap < 1:
            raise ConfigError("paths, calib_batches, batches and cap must be positive")
        try:
            cfg = self.detector_config()
            if self.p is not None:
                cfg.validate_for(self.p)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def detector_config(self) -> DetectorConfig:
        return DetectorConfig(
            a_u=self.a_u, a_v=self.a_v, eps_u=self.eps_u, eps_v=self.eps_v,
            q=self.q, window=self.window, sidedness=self.sidedness,
        )

    def with_overrides(self, **kwargs) -> "RunConfig":
        given = {k: v for k, v in kwargs.items() if v is not None}
        unknown = set(given) - set(KEYS)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
        try:
            return replace(self, **given)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


_PARSERS = {
    "n": int, "p": _opt_int, "a_u": float, "a_v": float, "eps_u": float, "eps_v": float,
    "q": int, "window": _opt_int, "sidedness": str, "gamma": _gamma, "paths": int,
    "seed": int, "input": str, "output": str, "thresholds": _thresholds, "scenario": str,
    "j": int, "dof": _opt_int, "diag_boost": float, "calib_batches": int,
    "delay_paths": int, "mfa_paths": int, "cap": int, "workers": int, "batches": int,
    "mean_shift": float,
}
KEYS = tuple(f.name for f in fields(RunConfig))
assert set(KEYS) == set(_PARSERS)


def parse_value(key: str, text: str):
    if key not in _PARSERS:
        raise ConfigError(f"unknown configuration key {key!r}")
    try:
        return _PARSERS[key](text.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = parse_value(key, val)
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def serialize_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {_fmt(getattr(cfg, k))}\n" for k in KEYS)
