# src/simharness/config.py
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Union

from src.ldp.errors import LdpError
from src.ldp.protocols import ProtocolKind, ProtocolSpec

from .errors import ConfigError

SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class Zipf:
    s: float = 1.1

    def __post_init__(self) -> None:
        if not (math.isfinite(self.s) and self.s > 0):
            raise ConfigError(f"Zipf exponent must be > 0, got {self.s}")

    def __str__(self) -> str:
        return f"zipf:{self.s:g}"


@dataclass(frozen=True)
class Uniform:
    def __str__(self) -> str:
        return "uniform"


@dataclass(frozen=True)
class FromFile:
    path: Path

    def __str__(self) -> str:
        return f"file:{self.path}"


Distribution = Union[Zipf, Uniform, FromFile]


def parse_distribution(text: str) -> Distribution:
    """'zipf:<s>' | 'zipf' (s = 1.1) | 'uniform' | 'file:<path>'."""
    name, _, arg = text.strip().partition(":")
    name = name.lower()
    if name == "zipf":
        if not arg:
            return Zipf()
        try:
            return Zipf(float(arg))
        except ValueError:
            raise ConfigError(f"bad Zipf exponent in {text!r}") from None
    if name == "uniform" and not arg:
        return Uniform()
    if name == "file" and arg:
        return FromFile(Path(arg))
    raise ConfigError(f"unknown distribution {text!r} (use zipf:<s>, uniform or file:<path>)")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One bench configuration. n is required for generated data and must be
    omitted for file input, where it is the number of values in the file.
    """
    kind: ProtocolKind
    epsilon: float
    d: int
    n: Optional[int] = None
    distribution: Distribution = field(default_factory=Zipf)
    master_seed: int = 0
    repetitions: int = 10
    theta: Optional[float] = None
    g: Optional[int] = None
    top_k: int = 30
    threshold_alpha: float = 0.05
    threshold: Optional[float] = None
    clamp: bool = False

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "kind", ProtocolKind.parse(self.kind))
        except LdpError as e:
            raise ConfigError(str(e)) from None

        if self.n is None and not isinstance(self.distribution, FromFile):
            raise ConfigError("n is required unless the data comes from a file")
        if self.n is not None and isinstance(self.distribution, FromFile):
            raise ConfigError("n comes from the file; drop --n when using file input")
        if self.n is not None and self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if not (0 <= self.master_seed < SEED_LIMIT):
            raise ConfigError(f"seed must be in [0, 2^64), got {self.master_seed}")
        if self.top_k < 1:
            raise ConfigError(f"top-k must be >= 1, got {self.top_k}")
        if not (0.0 < self.threshold_alpha < 1.0):
            raise ConfigError(f"threshold alpha must be in (0, 1), got {self.threshold_alpha}")
        if self.threshold is not None and self.threshold < 0:
            raise ConfigError(f"threshold must be >= 0, got {self.threshold}")

        # surfaces epsilon / d / theta / g problems at construction time
        _ = self.spec

    @cached_property
    def spec(self) -> ProtocolSpec:
        try:
            return ProtocolSpec.build(self.kind, self.epsilon, self.d, theta=self.theta, g=self.g)
        except LdpError as e:
            raise ConfigError(str(e)) from None

    @property
    def effective_top_k(self) -> int:
        return min(self.top_k, self.d)
