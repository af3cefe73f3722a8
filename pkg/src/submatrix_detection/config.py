"""Scenario and test configuration, plus the flat ``key=value`` file format."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

CONFIG_KEYS = ("M", "N", "m", "n", "epsilon", "s", "tau", "r", "band", "seed")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemConfig:
    M: int
    N: int
    m: int
    n: int
    epsilon: float
    s: float
    tau: float
    r: float
    band: int = 1
    seed: int = 0

    def __post_init__(self):
        if not (self.M >= 1 and self.N >= 1):
            raise ConfigError(f"grid must be at least 1x1, got {self.M}x{self.N}")
        if not (1 <= self.m <= self.M and 1 <= self.n <= self.N):
            raise ConfigError(f"need 1<=m<=M and 1<=n<=N, got m={self.m} M={self.M} n={self.n} N={self.N}")
        for name in ("epsilon", "tau", "r"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive and finite, got {v}")
        if not self.s >= 0:
            raise ConfigError(f"s must be >= 0, got {self.s}")
        if self.band < 1:
            raise ConfigError(f"band must be >= 1, got {self.band}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

    @property
    def p(self) -> float:
        return self.m / self.M

    @property
    def q(self) -> float:
        return self.n / self.N

    def with_(self, **changes) -> "ProblemConfig":
        return replace(self, **changes)

    def to_text(self) -> str:
        d = asdict(self)
        return "".join(f"{k}={_fmt(d[k])}\n" for k in CONFIG_KEYS)

    @classmethod
    def from_text(cls, text: str) -> "ProblemConfig":
        raw = parse_kv(text)
        unknown = set(raw) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = [k for k in CONFIG_KEYS if k not in raw and k not in ("band", "seed")]
        if missing:
            raise ConfigError(f"missing config keys: {missing}")
        kinds = {f.name: f.type for f in fields(cls)}
        values = {}
        for k, v in raw.items():
            try:
                values[k] = int(v) if kinds[k] == "int" else float(v)
            except ValueError as exc:
                raise ConfigError(f"bad value for {k}: {v!r}") from exc
        return cls(**values)

    @classmethod
    def load(cls, path) -> "ProblemConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())


@dataclass(frozen=True)
class TestConfig:
    delta: float = 0.05
    c_chi: float = 0.5
    alpha_floor: float = 0.05
    restarts: int = 50
    max_iters: int = 100
    exhaustive_budget: int = 10**6

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if not 0 < self.c_chi < 1:
            raise ConfigError(f"c_chi must lie in (0, 1), got {self.c_chi}")
        if not self.delta > 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        if not 0 < self.alpha_floor < 1:
            raise ConfigError(f"alpha_floor must lie in (0, 1), got {self.alpha_floor}")
        if self.restarts < 1 or self.max_iters < 1:
            raise ConfigError("restarts and max_iters must be >= 1")


def parse_kv(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)
