"""Request populations (independent draws) and periodic request streams."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Request:
    id: str
    source: str
    size: float  # bits
    intensity: float  # operations per bit
    deadline: float  # s, measured from gen_time
    gen_time: float = 0.0
    assigned_ap: str | None = None
    result_size: float = 0.0

    def __post_init__(self):
        if not (self.size > 0 and self.intensity > 0 and self.deadline > 0 and self.gen_time >= 0):
            raise ConfigError(f"request {self.id}: need size, intensity, deadline > 0 and gen_time >= 0")

    @property
    def n_ops(self) -> float:
        return self.size * self.intensity


@dataclass(frozen=True)
class Dist:
    """A strictly positive scalar distribution.

    kind "constant" uses ``value``; "uniform" uses ``low``/``high``;
    "lognormal" uses ``median`` and ``sigma`` (of the underlying normal).
    """

    kind: str
    value: float = 0.0
    low: float = 0.0
    high: float = 0.0
    median: float = 0.0
    sigma: float = 0.0

    def check(self, name: str) -> list[str]:
        if self.kind == "constant":
            ok = self.value > 0
        elif self.kind == "uniform":
            ok = 0 < self.low <= self.high
        elif self.kind == "lognormal":
            ok = self.median > 0 and self.sigma >= 0
        else:
            return [f"{name}: unknown distribution {self.kind!r}"]
        return [] if ok else [f"{name}: {self.kind} parameters must give a strictly positive support"]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(n, self.value)
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, n)
        return self.median * np.exp(self.sigma * rng.standard_normal(n))


def constant(value: float) -> Dist:
    return Dist("constant", value=value)


def uniform(low: float, high: float) -> Dist:
    return Dist("uniform", low=low, high=high)


@dataclass(frozen=True)
class RequestDistribution:
    size: Dist
    intensity: Dist
    deadline: Dist
    sources: dict[str, float] = field(default_factory=dict)  # device id -> weight
    result_size: float = 0.0

    def check(self) -> list[str]:
        errs = self.size.check("size") + self.intensity.check("intensity") + self.deadline.check("deadline")
        if not self.sources:
            errs.append("sources: at least one source device is required")
        elif any(w < 0 for w in self.sources.values()) or sum(self.sources.values()) <= 0:
            errs.append("sources: weights must be >= 0 with a positive sum")
        if self.result_size < 0:
            errs.append("result_size must be >= 0")
        return errs

    def with_size(self, size: float) -> "RequestDistribution":
        return replace(self, size=constant(size))


def sample_requests(dist: RequestDistribution, n: int, seed) -> list[Request]:
    """Draw ``n`` independent requests; identical output for identical ``seed``.

    ``seed`` may be an int, a SeedSequence or a Generator.
    """
    errs = dist.check()
    if errs:
        raise ConfigError(errs)
    if n < 0:
        raise ConfigError("n must be >= 0")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    names = sorted(dist.sources)
    w = np.array([dist.sources[s] for s in names], dtype=float)
    # fixed draw order keeps each column's stream independent of the others' kinds
    src_idx = rng.choice(len(names), size=n, p=w / w.sum())
    sizes = dist.size.sample(rng, n)
    intens = dist.intensity.sample(rng, n)
    deadlines = dist.deadline.sample(rng, n)
    return [
        Request(id=f"r{i}", source=names[src_idx[i]], size=float(sizes[i]),
                intensity=float(intens[i]), deadline=float(deadlines[i]),
                result_size=dist.result_size)
        for i in range(n)
    ]


def periodic_stream(rate: float, template: Request, horizon: float) -> list[Request]:
    """Requests generated at ``k/rate`` for every ``k`` with ``k/rate < horizon``."""
    if not (rate > 0 and horizon > 0):
        raise ConfigError("rate and horizon must be > 0")
    n = stream_length(rate, horizon)
    return [replace(template, id=f"{template.id}{k}", gen_time=k / rate) for k in range(n)]


def stream_length(rate: float, horizon: float) -> int:
    # slack absorbs rate*horizon landing a rounding error above an integer
    return max(1, math.ceil(rate * horizon - 1e-9))
