"""Hypothesis classes, finite reductions and risk evaluation.

A class exposes ``candidates(breakpoints)``, a vectorised finite set of
classifiers that realizes every distinct behavior of the class on the given
breakpoints. Candidate sets count accepted sample points and compute exact
acceptance masses for whole arrays of classifiers at once, which is what makes
exhaustive ERM and exponent fitting cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np

from .distributions import ContinuousDistribution, Distribution
from .errors import DomainMismatchError, EmptySampleError, UnsupportedOperationError
from .regions import (
    Classifier,
    DiscreteLabeling,
    IntervalUnion,
    classifier_from_dict,
    decode_float,
    encode_float,
)

__all__ = [
    "HypothesisClass",
    "ThresholdOnSegment",
    "IntervalUnionPair",
    "AllLabelings",
    "ExplicitList",
    "CandidateSet",
    "evaluate",
    "true_risks",
    "empirical_risks",
    "finite_reduction",
    "class_from_dict",
    "MAX_LABELING_POINTS",
]

MAX_LABELING_POINTS = 22


def _count_in(sorted_xs: np.ndarray, lo, hi) -> np.ndarray:
    """Number of sorted sample points in each closed interval [lo, hi]."""
    return np.searchsorted(sorted_xs, hi, side="right") - np.searchsorted(sorted_xs, lo, side="left")


def _real_sample(xs) -> np.ndarray:
    xs = np.asarray(xs)
    if xs.size and xs.dtype.kind not in "fiu":
        raise DomainMismatchError("interval class evaluated on a discrete sample")
    return np.sort(xs.astype(float).ravel())


def _continuous(dist: Distribution) -> ContinuousDistribution:
    if not isinstance(dist, ContinuousDistribution):
        raise DomainMismatchError("interval class measured under a discrete law")
    return dist


class CandidateSet:
    """A finite, ordered family of classifiers with vectorised risk helpers.

    ``keys`` is an ``(m, k)`` float array of parameters; row order is the
    lexicographic tie-break order.
    """

    keys: np.ndarray

    def __len__(self) -> int:
        return len(self.keys)

    def count_accepted(self, sample) -> np.ndarray:
        raise NotImplementedError

    def masses(self, dist: Distribution) -> np.ndarray:
        raise NotImplementedError

    def classifier(self, i: int) -> Classifier:
        raise NotImplementedError

    def classifiers(self) -> list[Classifier]:
        return [self.classifier(i) for i in range(len(self))]


class HypothesisClass:
    family: str

    @property
    def vc_dim(self) -> int:
        raise NotImplementedError

    def candidates(self, breakpoints: Iterable = ()) -> CandidateSet:
        raise NotImplementedError

    def grid(self, size: int = 512, knots: Iterable[float] = ()) -> CandidateSet:
        """Candidates on ``size`` evenly spaced parameters plus the given knots."""
        return self.candidates(knots)

    def to_dict(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------- thresholds


@dataclass(frozen=True)
class _ThresholdCandidates(CandidateSet):
    ts: np.ndarray
    hi: float

    @property
    def keys(self):
        return self.ts[:, None]

    def count_accepted(self, sample):
        xs = _real_sample(sample)
        return _count_in(xs, self.ts, self.hi)

    def masses(self, dist):
        return _continuous(dist).interval_mass(self.ts, np.full_like(self.ts, self.hi))

    def classifier(self, i):
        return IntervalUnion.of((float(self.ts[i]), self.hi))


@dataclass(frozen=True)
class ThresholdOnSegment(HypothesisClass):
    """Classifiers accepting ``[t, hi]`` for ``t`` in ``[lo, hi]``."""

    lo: float
    hi: float
    family: str = field(default="threshold", init=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.lo) and self.lo < self.hi):
            raise ValueError("ThresholdOnSegment needs finite lo < hi")

    @property
    def vc_dim(self) -> int:
        return 1

    def member(self, t: float) -> IntervalUnion:
        if not self.lo <= t <= self.hi:
            raise ValueError(f"threshold {t} outside [{self.lo}, {self.hi}]")
        return IntervalUnion.of((t, self.hi))

    def candidates(self, breakpoints=()):
        # t in (b_i, b_{i+1}] accepts the same points as t = b_{i+1}, so the
        # breakpoints themselves plus the two ends realize every behavior.
        bp = np.asarray(list(breakpoints), dtype=float).ravel()
        bp = bp[(bp >= self.lo) & (bp <= self.hi)]
        ts = np.unique(np.concatenate([[self.lo, self.hi], bp]))
        return _ThresholdCandidates(ts, self.hi)

    def grid(self, size=512, knots=()):
        top = self.hi if math.isfinite(self.hi) else self.lo + 80.0
        return self.candidates(np.concatenate([np.linspace(self.lo, top, size), list(knots)]))

    def to_dict(self):
        return {"family": "threshold", "lo": self.lo, "hi": encode_float(self.hi)}


# ------------------------------------------------------------- interval pairs


@dataclass(frozen=True)
class _PairCandidates(CandidateSet):
    a: np.ndarray
    b: np.ndarray
    t0: float

    @property
    def keys(self):
        return np.column_stack([self.a, self.b])

    def count_accepted(self, sample):
        xs = _real_sample(sample)
        upper = _count_in(xs, self.a, 1.0)
        lower = _count_in(xs, self.b, self.t0)
        # [a, 1] and [b, t0] share the single point t0 when a = t0
        shared = np.where(self.a == self.t0, _count_in(xs, self.t0, self.t0), 0)
        return upper + lower - shared

    def masses(self, dist):
        dist = _continuous(dist)
        ones = np.ones_like(self.a)
        return np.clip(dist.interval_mass(self.a, ones) + dist.interval_mass(self.b, self.t0 * ones), 0.0, 1.0)

    def classifier(self, i):
        return IntervalUnion.of((float(self.a[i]), 1.0), (float(self.b[i]), self.t0))


@dataclass(frozen=True)
class IntervalUnionPair(HypothesisClass):
    """Classifiers accepting ``[a, 1] ∪ [b, t0]`` with ``a in [t0, 1]``, ``b in [t1, t0]``."""

    t0: float
    t1: float
    family: str = field(default="pair", init=False, repr=False)

    def __post_init__(self):
        if not self.t1 < self.t0 < 1.0:
            raise ValueError("IntervalUnionPair needs t1 < t0 < 1")

    @property
    def vc_dim(self) -> int:
        return 2

    def member(self, a: float, b: float) -> IntervalUnion:
        if not (self.t0 <= a <= 1.0 and self.t1 <= b <= self.t0):
            raise ValueError("pair parameters out of range")
        return IntervalUnion.of((a, 1.0), (b, self.t0))

    def _axes(self, breakpoints):
        bp = np.asarray(list(breakpoints), dtype=float).ravel()
        a_axis = np.unique(np.concatenate([[self.t0, 1.0], bp[(bp >= self.t0) & (bp <= 1.0)]]))
        b_axis = np.unique(np.concatenate([[self.t1, self.t0], bp[(bp >= self.t1) & (bp <= self.t0)]]))
        return a_axis, b_axis

    def candidates(self, breakpoints=()):
        a_axis, b_axis = self._axes(breakpoints)
        a, b = np.meshgrid(a_axis, b_axis, indexing="ij")
        return _PairCandidates(a.ravel(), b.ravel(), self.t0)

    def grid(self, size=512, knots=()):
        pts = np.concatenate([np.linspace(self.t1, 1.0, size), list(knots)])
        return self.candidates(pts)

    def to_dict(self):
        return {"family": "pair", "t0": self.t0, "t1": self.t1}


# ---------------------------------------------------------------- labelings


@dataclass(frozen=True)
class _LabelingCandidates(CandidateSet):
    points: tuple
    bits: np.ndarray  # (m, n_points) of 0/1

    @property
    def keys(self):
        return self.bits.astype(float)

    def _counts(self, sample) -> np.ndarray:
        xs = np.asarray(sample).ravel()
        if xs.size and xs.dtype.kind in "fc":
            raise DomainMismatchError("labeling class evaluated on a real-valued sample")
        if xs.size == 0:
            return np.zeros(len(self.points), dtype=np.int64)
        names = np.asarray(self.points)
        order = np.argsort(names)
        pos = np.searchsorted(names[order], xs)
        pos = np.minimum(pos, len(names) - 1)
        hit = names[order][pos] == xs
        if not hit.all():
            raise DomainMismatchError(f"sample point {xs[~hit][0]!r} outside the labeled domain")
        return np.bincount(order[pos], minlength=len(self.points))

    def count_accepted(self, sample):
        return self.bits @ self._counts(sample)

    def masses(self, dist):
        if not dist.is_discrete:
            raise DomainMismatchError("labeling class measured under a continuous law")
        table = dist.as_dict()
        w = np.array([table.get(p, 0.0) for p in self.points])
        return np.clip(self.bits @ w, 0.0, 1.0)

    def classifier(self, i):
        return DiscreteLabeling.from_bits(self.points, self.bits[i])


@dataclass(frozen=True)
class AllLabelings(HypothesisClass):
    """Every labeling of ``points`` with ``forced_ones`` labeled 1 and ``forced_zeros`` labeled 0."""

    points: tuple
    forced_ones: frozenset = frozenset()
    forced_zeros: frozenset = frozenset()
    family: str = field(default="labelings", init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "forced_ones", frozenset(self.forced_ones))
        object.__setattr__(self, "forced_zeros", frozenset(self.forced_zeros))
        if len(set(self.points)) != len(self.points):
            raise ValueError("duplicate point ids")
        if (self.forced_ones | self.forced_zeros) - set(self.points):
            raise DomainMismatchError("forced points must belong to the domain")
        if self.forced_ones & self.forced_zeros:
            raise ValueError("a point cannot be forced to both labels")
        if self.vc_dim > MAX_LABELING_POINTS:
            raise ValueError(f"at most {MAX_LABELING_POINTS} free points can be enumerated")

    @property
    def free_points(self) -> tuple:
        return tuple(p for p in self.points if p not in self.forced_ones and p not in self.forced_zeros)

    @property
    def vc_dim(self) -> int:
        return len(self.free_points)

    def bit_matrix(self) -> np.ndarray:
        return _labeling_bits(self.points, self.forced_ones, self.forced_zeros)

    def candidates(self, breakpoints=()):
        return _LabelingCandidates(self.points, self.bit_matrix())

    def grid(self, size=512, knots=()):
        return self.candidates()

    def to_dict(self):
        return {
            "family": "labelings",
            "points": list(self.points),
            "forced_ones": sorted(self.forced_ones, key=str),
            "forced_zeros": sorted(self.forced_zeros, key=str),
        }


def _labeling_bits(points, forced_ones, forced_zeros) -> np.ndarray:
    free = [i for i, p in enumerate(points) if p not in forced_ones and p not in forced_zeros]
    f = len(free)
    codes = np.arange(2**f, dtype=np.int64)
    bits = np.zeros((2**f, len(points)), dtype=np.int8)
    # Most significant free bit first so row order is lexicographic.
    for j, col in enumerate(free):
        bits[:, col] = (codes >> (f - 1 - j)) & 1
    for i, p in enumerate(points):
        if p in forced_ones:
            bits[:, i] = 1
    return bits


# ------------------------------------------------------------ explicit lists


@dataclass(frozen=True)
class _ListCandidates(CandidateSet):
    items: tuple

    @property
    def keys(self):
        return np.arange(len(self.items), dtype=float)[:, None]

    def count_accepted(self, sample):
        xs = np.asarray(sample)
        return np.array([int(h.indicator(xs).sum()) for h in self.items], dtype=np.int64)

    def masses(self, dist):
        return np.array([dist.measure(h) for h in self.items])

    def classifier(self, i):
        return self.items[i]


@dataclass(frozen=True)
class ExplicitList(HypothesisClass):
    classifiers: tuple
    declared_vc_dim: int = 1
    family: str = field(default="explicit", init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        if not self.classifiers:
            raise ValueError("ExplicitList needs at least one classifier")
        if self.declared_vc_dim < 0:
            raise ValueError("VC dimension must be nonnegative")
        # A finite class of m members cannot shatter more than log2(m) points.
        if self.declared_vc_dim > math.log2(len(self.classifiers)) + 1e-12 and len(self.classifiers) > 1:
            raise ValueError("declared VC dimension exceeds log2 of the class size")

    @property
    def vc_dim(self) -> int:
        return self.declared_vc_dim

    def candidates(self, breakpoints=()):
        return _ListCandidates(self.classifiers)

    def to_dict(self):
        return {
            "family": "explicit",
            "vc_dim": self.declared_vc_dim,
            "classifiers": [h.to_dict() for h in self.classifiers],
        }


# ------------------------------------------------------------------- risks


def evaluate(h: Classifier, x: Any) -> int:
    return h(x)


def true_risks(h: Classifier, mu0: Distribution, mu1: Distribution) -> tuple[float, float]:
    """Exact (Type-I, Type-II) = (mu0(accept), 1 - mu1(accept))."""
    type1 = mu0.measure(h)
    type2 = max(0.0, 1.0 - mu1.measure(h))
    return type1, type2


def empirical_risks(h: Classifier, s0=None, s1=None) -> tuple[float | None, float | None]:
    """Empirical Type-I on ``s0`` and Type-II on ``s1``; pass ``None`` to skip one."""

    def frac(sample, accept):
        xs = np.asarray(sample)
        if xs.size == 0:
            raise EmptySampleError("empirical risk requested on an empty sample")
        hits = h.indicator(xs)
        return float(hits.mean()) if accept else float(1.0 - hits.mean())

    type1 = None if s0 is None else frac(s0, True)
    type2 = None if s1 is None else frac(s1, False)
    return type1, type2


def finite_reduction(cls: HypothesisClass, breakpoints: Iterable = ()) -> ExplicitList:
    if not isinstance(cls, (ThresholdOnSegment, IntervalUnionPair)):
        raise UnsupportedOperationError(f"finite reduction is defined for parametric classes, not {cls.family}")
    cands = cls.candidates(breakpoints)
    return ExplicitList(tuple(cands.classifiers()), declared_vc_dim=min(cls.vc_dim, int(math.log2(len(cands)))) if len(cands) > 1 else 0)


def class_from_dict(d: Mapping[str, Any]) -> HypothesisClass:
    fam = d.get("family")
    if fam == "threshold":
        return ThresholdOnSegment(float(d["lo"]), decode_float(d["hi"]))
    if fam == "pair":
        return IntervalUnionPair(float(d["t0"]), float(d["t1"]))
    if fam == "labelings":
        return AllLabelings(
            tuple(str(p) for p in d["points"]),
            frozenset(str(p) for p in d.get("forced_ones", ())),
            frozenset(str(p) for p in d.get("forced_zeros", ())),
        )
    if fam == "explicit":
        return ExplicitList(tuple(classifier_from_dict(c) for c in d["classifiers"]), int(d.get("vc_dim", 1)))
    raise ValueError(f"unknown hypothesis family {fam!r}")
