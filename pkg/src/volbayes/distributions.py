"""Prior distribution families.

Each family provides the log density, its derivative (needed for
gradient-based sampling) and a random sampler. Half-distributions are
supported on x >= 0 with the density doubled.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln

_LOG_2PI = np.log(2.0 * np.pi)


class Distribution(ABC):
    @abstractmethod
    def logpdf(self, x: float) -> float: ...

    @abstractmethod
    def dlogpdf(self, x: float) -> float: ...

    @abstractmethod
    def sample(self, rng: np.random.Generator) -> float: ...

    def to_config(self) -> dict:
        d = {"dist": _NAMES[type(self)]}
        d.update({k: float(v) for k, v in self.__dict__.items()})
        return d


@dataclass
class Normal(Distribution):
    mu: float = 0.0
    sigma: float = 1.0

    def logpdf(self, x):
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - np.log(self.sigma) - 0.5 * _LOG_2PI

    def dlogpdf(self, x):
        return -(x - self.mu) / self.sigma**2

    def sample(self, rng):
        return self.mu + self.sigma * rng.standard_normal()


@dataclass
class HalfNormal(Distribution):
    """Normal(0, scale) restricted to x >= 0."""

    scale: float = 1.0

    def logpdf(self, x):
        if x < 0:
            return -np.inf
        return np.log(2.0) - 0.5 * (x / self.scale) ** 2 - np.log(self.scale) - 0.5 * _LOG_2PI

    def dlogpdf(self, x):
        return -x / self.scale**2

    def sample(self, rng):
        return abs(self.scale * rng.standard_normal())


@dataclass
class StudentT(Distribution):
    nu: float = 5.0
    mu: float = 0.0
    sigma: float = 1.0

    def _log_norm(self):
        return (
            gammaln((self.nu + 1) / 2)
            - gammaln(self.nu / 2)
            - 0.5 * np.log(self.nu * np.pi)
            - np.log(self.sigma)
        )

    def logpdf(self, x):
        z = (x - self.mu) / self.sigma
        return self._log_norm() - 0.5 * (self.nu + 1) * np.log1p(z * z / self.nu)

    def dlogpdf(self, x):
        z = (x - self.mu) / self.sigma
        return -(self.nu + 1) * z / (self.nu + z * z) / self.sigma

    def sample(self, rng):
        return self.mu + self.sigma * rng.standard_t(self.nu)


@dataclass
class HalfStudentT(Distribution):
    """Student-t(nu, 0, scale) restricted to x >= 0."""

    nu: float = 5.0
    scale: float = 1.0

    def logpdf(self, x):
        if x < 0:
            return -np.inf
        return np.log(2.0) + StudentT(self.nu, 0.0, self.scale).logpdf(x)

    def dlogpdf(self, x):
        z = x / self.scale
        return -(self.nu + 1) * z / (self.nu + z * z) / self.scale

    def sample(self, rng):
        return abs(self.scale * rng.standard_t(self.nu))


@dataclass
class Gamma(Distribution):
    """Shape-rate parameterization: mean = shape / rate."""

    shape: float
    rate: float

    def logpdf(self, x):
        if x <= 0:
            return -np.inf
        return (
            self.shape * np.log(self.rate)
            - gammaln(self.shape)
            + (self.shape - 1) * np.log(x)
            - self.rate * x
        )

    def dlogpdf(self, x):
        return (self.shape - 1) / x - self.rate

    def sample(self, rng):
        return rng.gamma(self.shape, 1.0 / self.rate)


@dataclass
class Beta(Distribution):
    a: float
    b: float

    def logpdf(self, x):
        if not 0 < x < 1:
            return -np.inf
        return (self.a - 1) * np.log(x) + (self.b - 1) * np.log1p(-x) - betaln(self.a, self.b)

    def dlogpdf(self, x):
        return (self.a - 1) / x - (self.b - 1) / (1 - x)

    def sample(self, rng):
        return rng.beta(self.a, self.b)


@dataclass
class Uniform(Distribution):
    """Flat density on (lower, upper)."""

    lower: float = 0.0
    upper: float = 1.0

    def logpdf(self, x):
        if not self.lower < x < self.upper:
            return -np.inf
        return -np.log(self.upper - self.lower)

    def dlogpdf(self, x):
        return 0.0

    def sample(self, rng):
        return rng.uniform(self.lower, self.upper)


_NAMES: dict[type, str] = {
    Normal: "normal",
    HalfNormal: "half_normal",
    StudentT: "student_t",
    HalfStudentT: "half_student_t",
    Gamma: "gamma",
    Beta: "beta",
    Uniform: "uniform",
}
_BY_NAME = {v: k for k, v in _NAMES.items()}


def from_config(spec: dict) -> Distribution:
    """Build a distribution from a config mapping like
    ``{"dist": "half_normal", "scale": 0.03}``."""
    if not isinstance(spec, dict) or "dist" not in spec:
        raise ValueError(f"distribution spec must be a mapping with a 'dist' key: {spec!r}")
    kind = spec["dist"]
    if kind not in _BY_NAME:
        raise ValueError(f"unknown distribution {kind!r}; known: {sorted(_BY_NAME)}")
    kwargs = {k: float(v) for k, v in spec.items() if k != "dist"}
    try:
        return _BY_NAME[kind](**kwargs)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind!r}: {exc}") from None
