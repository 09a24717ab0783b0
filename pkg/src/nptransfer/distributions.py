"""Exact one-dimensional and finite probability laws.

Every law exposes its density with respect to the dominating measure of its
kind (Lebesgue for continuous laws, counting measure for ``DiscreteOnPoints``),
the exact probability of an acceptance region, i.i.d. sampling from an explicit
``numpy.random.Generator``, and a JSON round trip through ``to_dict`` /
``distribution_from_dict``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.special import erfc

from .errors import ConfigError, DomainMismatchError, UnsupportedOperationError
from .regions import Classifier, DiscreteLabeling, IntervalUnion

__all__ = [
    "Distribution",
    "ContinuousDistribution",
    "Gaussian",
    "Uniform",
    "PowerLaw",
    "Triangular",
    "Mixture",
    "DiscreteOnPoints",
    "density",
    "measure_of_region",
    "sample",
    "kl_divergence",
    "distribution_from_dict",
    "make_rng",
]

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def make_rng(seed: int | np.random.SeedSequence | None = None) -> np.random.Generator:
    """Counter-based generator (Philox) so streams can be split with ``spawn``."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


class Distribution:
    """Common interface; concrete laws are frozen dataclasses."""

    kind: str
    is_discrete: bool = False

    def pdf(self, x):
        raise NotImplementedError

    def measure(self, region: Classifier) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class ContinuousDistribution(Distribution):
    is_discrete = False

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def interval_mass(self, lo, hi):
        """Vectorised mass of closed intervals ``[lo, hi]``."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return np.clip(self.cdf(hi) - self.cdf(lo), 0.0, 1.0)

    def knots(self) -> tuple[float, ...]:
        """Finite points where the density is not analytic (support ends, kinks)."""
        return ()

    def window(self) -> tuple[float, float]:
        """A finite interval outside of which all mass and all structure is negligible."""
        raise NotImplementedError

    def measure(self, region: Classifier) -> float:
        if not isinstance(region, IntervalUnion):
            raise DomainMismatchError(f"{self.kind} law measured on a discrete region")
        if region.is_empty:
            return 0.0
        lo = np.array([a for a, _ in region.intervals])
        hi = np.array([b for _, b in region.intervals])
        return float(min(1.0, self.interval_mass(lo, hi).sum()))


@dataclass(frozen=True)
class Gaussian(ContinuousDistribution):
    mean: float = 0.0
    variance: float = 1.0
    kind: str = field(default="gaussian", init=False, repr=False)

    def __post_init__(self):
        if not self.variance > 0:
            raise ConfigError("Gaussian variance must be positive")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.sd
        return np.exp(-0.5 * z * z - _LOG_SQRT_2PI) / self.sd

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.sd
        return -0.5 * z * z - _LOG_SQRT_2PI - math.log(self.sd)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / (self.sd * _SQRT2)
        return 0.5 * erfc(-z)

    def sf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / (self.sd * _SQRT2)
        return 0.5 * erfc(z)

    def interval_mass(self, lo, hi):
        # Upper-tail intervals go through the survival function so that tiny
        # tail masses keep full relative precision.
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        upper = lo >= self.mean
        via_sf = self.sf(lo) - self.sf(hi)
        via_cdf = self.cdf(hi) - self.cdf(lo)
        return np.clip(np.where(upper, via_sf, via_cdf), 0.0, 1.0)

    def window(self):
        return (self.mean - 40 * self.sd, self.mean + 40 * self.sd)

    def sample(self, rng, n):
        return rng.normal(self.mean, self.sd, size=n)

    def to_dict(self):
        return {"kind": "gaussian", "mean": self.mean, "variance": self.variance}


@dataclass(frozen=True)
class Uniform(ContinuousDistribution):
    lo: float = 0.0
    hi: float = 1.0
    kind: str = field(default="uniform", init=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ConfigError("Uniform needs finite lo < hi")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), 1.0 / (self.hi - self.lo), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def knots(self):
        return (self.lo, self.hi)

    def window(self):
        return (self.lo, self.hi)

    def sample(self, rng, n):
        return rng.uniform(self.lo, self.hi, size=n)

    def to_dict(self):
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class PowerLaw(ContinuousDistribution):
    """Density ``rho * x**(rho - 1)`` on [0, 1]."""

    rho: float = 1.0
    kind: str = field(default="powerlaw", init=False, repr=False)

    def __post_init__(self):
        if not self.rho >= 1:
            raise ConfigError("PowerLaw needs rho >= 1")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= 0.0) & (x <= 1.0)
        return np.where(inside, self.rho * np.power(np.clip(x, 0.0, 1.0), self.rho - 1.0), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.power(np.clip(x, 0.0, 1.0), self.rho)

    def knots(self):
        return (0.0, 1.0)

    def window(self):
        return (0.0, 1.0)

    def sample(self, rng, n):
        return rng.power(self.rho, size=n)

    def to_dict(self):
        return {"kind": "powerlaw", "rho": self.rho}


@dataclass(frozen=True)
class Triangular(ContinuousDistribution):
    """Density ``x/4 + 1/2`` on [-2, 0] and ``-x/4 + 1/2`` on (0, 2]."""

    kind: str = field(default="triangular", init=False, repr=False)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= 2.0, 0.5 - np.abs(x) / 4.0, 0.0)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
        left = (x + 2.0) ** 2 / 8.0
        right = 1.0 - (2.0 - x) ** 2 / 8.0
        return np.where(x <= 0.0, left, right)

    def sf(self, x):
        x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
        left = 1.0 - (x + 2.0) ** 2 / 8.0
        right = (2.0 - x) ** 2 / 8.0
        return np.where(x <= 0.0, left, right)

    def interval_mass(self, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return np.clip(np.where(lo >= 0.0, self.sf(lo) - self.sf(hi), self.cdf(hi) - self.cdf(lo)), 0.0, 1.0)

    def knots(self):
        return (-2.0, 0.0, 2.0)

    def window(self):
        return (-2.0, 2.0)

    def sample(self, rng, n):
        return rng.triangular(-2.0, 0.0, 2.0, size=n)

    def to_dict(self):
        return {"kind": "triangular"}


@dataclass(frozen=True)
class Mixture(ContinuousDistribution):
    components: tuple[tuple[float, ContinuousDistribution], ...] = ()
    kind: str = field(default="mixture", init=False, repr=False)

    def __post_init__(self):
        comps = tuple((float(w), d) for w, d in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ConfigError("Mixture needs at least one component")
        for w, d in comps:
            if not 0.0 < w <= 1.0:
                raise ConfigError("mixture weights must lie in (0, 1]")
            if not isinstance(d, ContinuousDistribution):
                raise DomainMismatchError("mixture components must be continuous laws")
        if abs(sum(w for w, _ in comps) - 1.0) > 1e-12:
            raise ConfigError("mixture weights must sum to 1")

    def pdf(self, x):
        return sum(w * d.pdf(x) for w, d in self.components)

    def cdf(self, x):
        return sum(w * d.cdf(x) for w, d in self.components)

    def interval_mass(self, lo, hi):
        return np.clip(sum(w * d.interval_mass(lo, hi) for w, d in self.components), 0.0, 1.0)

    def knots(self):
        return tuple(sorted({k for _, d in self.components for k in d.knots()}))

    def window(self):
        wins = [d.window() for _, d in self.components]
        return (min(a for a, _ in wins), max(b for _, b in wins))

    def sample(self, rng, n):
        weights = np.array([w for w, _ in self.components])
        counts = rng.multinomial(n, weights / weights.sum())
        parts = [d.sample(rng, int(c)) for (_, d), c in zip(self.components, counts)]
        out = np.concatenate(parts) if parts else np.empty(0)
        rng.shuffle(out)
        return out

    def to_dict(self):
        return {
            "kind": "mixture",
            "components": [{"weight": w, "dist": d.to_dict()} for w, d in self.components],
        }


@dataclass(frozen=True)
class DiscreteOnPoints(Distribution):
    """Finite law on string-named atoms; density is w.r.t. counting measure."""

    points: tuple[str, ...]
    masses: tuple[float, ...]
    kind: str = field(default="discrete", init=False, repr=False)
    is_discrete = True

    def __post_init__(self):
        pts = tuple(self.points)
        ms = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", ms)
        if len(pts) != len(ms):
            raise ConfigError("points and masses differ in length")
        if len(set(pts)) != len(pts):
            raise ConfigError("duplicate point ids")
        if not all(isinstance(p, str) for p in pts):
            raise TypeError("discrete point ids must be strings")
        if any(m < 0 for m in ms):
            raise ConfigError("masses must be nonnegative")
        if abs(sum(ms) - 1.0) > 1e-12:
            raise ConfigError(f"masses sum to {sum(ms)!r}, not 1")

    @classmethod
    def from_mapping(cls, masses: Mapping[str, float]) -> "DiscreteOnPoints":
        return cls(tuple(masses), tuple(masses.values()))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.points, self.masses))

    def mass_of(self, point: str) -> float:
        try:
            return self.masses[self.points.index(point)]
        except ValueError:
            return 0.0

    def pdf(self, x):
        if isinstance(x, (float, int)) and not isinstance(x, bool):
            raise DomainMismatchError("discrete law queried at a real number")
        if isinstance(x, str):
            return self.mass_of(x)
        table = self.as_dict()
        return np.array([table.get(p, 0.0) for p in np.asarray(x).ravel()])

    def measure(self, region: Classifier) -> float:
        if not isinstance(region, DiscreteLabeling):
            raise DomainMismatchError("discrete law measured on an interval region")
        table = self.as_dict()
        return float(min(1.0, math.fsum(table.get(p, 0.0) for p in region.accepted)))

    def sample(self, rng, n):
        if n == 0:
            return np.empty(0, dtype=f"<U{max(len(p) for p in self.points)}")
        idx = rng.choice(len(self.points), size=n, p=np.asarray(self.masses) / math.fsum(self.masses))
        return np.asarray(self.points)[idx]

    def to_dict(self):
        return {"kind": "discrete", "masses": self.as_dict()}


def density(dist: Distribution, x) -> float:
    if dist.is_discrete:
        if not isinstance(x, str):
            raise DomainMismatchError("discrete law queried at a non-point value")
        return dist.mass_of(x)
    if isinstance(x, str):
        raise DomainMismatchError(f"{dist.kind} law queried at a discrete point")
    return float(dist.pdf(float(x)))


def measure_of_region(dist: Distribution, region: Classifier) -> float:
    return dist.measure(region)


def sample(dist: Distribution, rng: np.random.Generator, n: int) -> np.ndarray:
    if n < 0:
        raise ValueError("sample size must be nonnegative")
    return dist.sample(rng, int(n))


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """KL(p || q) in nats for finite laws; +inf when p is not dominated by q."""
    if not (p.is_discrete and q.is_discrete):
        raise UnsupportedOperationError("KL divergence is only implemented for discrete laws")
    qt = q.as_dict()
    terms = []
    for point, pm in zip(p.points, p.masses):
        if pm == 0.0:
            continue
        qm = qt.get(point, 0.0)
        if qm == 0.0:
            return math.inf
        terms.append(pm * math.log(pm / qm))
    return max(0.0, math.fsum(terms))


def distribution_from_dict(d: Mapping[str, Any]) -> Distribution:
    kind = d.get("kind")
    if kind == "gaussian":
        return Gaussian(float(d.get("mean", 0.0)), float(d.get("variance", 1.0)))
    if kind == "uniform":
        return Uniform(float(d["lo"]), float(d["hi"]))
    if kind == "powerlaw":
        return PowerLaw(float(d["rho"]))
    if kind == "triangular":
        return Triangular()
    if kind == "mixture":
        comps = tuple((float(c["weight"]), distribution_from_dict(c["dist"])) for c in d["components"])
        return Mixture(comps)
    if kind == "discrete":
        return DiscreteOnPoints.from_mapping({str(k): float(v) for k, v in d["masses"].items()})
    raise ConfigError(f"unknown distribution kind {kind!r}")
