"""Acceptance regions: the sets {x : h(x) = 1} of deterministic classifiers.

Two shapes exist. ``IntervalUnion`` lives on the real line; ``DiscreteLabeling``
lives on a finite set of named points. A classifier *is* its acceptance
region, so these are also the library's classifier types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Union

import numpy as np

from .errors import DomainMismatchError

__all__ = [
    "IntervalUnion",
    "DiscreteLabeling",
    "Classifier",
    "classifier_from_dict",
    "encode_float",
    "decode_float",
]


def encode_float(x: float) -> float | str:
    """JSON-safe float: infinities become strings."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def decode_float(x: Any) -> float:
    return float(x)


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of closed intervals on the line, sorted and disjoint.

    Endpoints may be infinite. Degenerate intervals ``[a, a]`` are allowed,
    they carry no Lebesgue mass but do accept sample points equal to ``a``.
    Overlapping or touching inputs are merged on construction.
    """

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        cleaned = []
        for lo, hi in self.intervals:
            lo, hi = float(lo), float(hi)
            if math.isnan(lo) or math.isnan(hi):
                raise ValueError("interval endpoints must not be NaN")
            if lo > hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
            cleaned.append((lo, hi))
        cleaned.sort()
        merged: list[tuple[float, float]] = []
        for lo, hi in cleaned:
            if merged and lo <= merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def of(cls, *pairs: tuple[float, float]) -> "IntervalUnion":
        return cls(tuple(pairs))

    @classmethod
    def everything(cls) -> "IntervalUnion":
        return cls(((-math.inf, math.inf),))

    @classmethod
    def nothing(cls) -> "IntervalUnion":
        return cls(())

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, x: float) -> bool:
        return any(lo <= x <= hi for lo, hi in self.intervals)

    def __call__(self, x: Any) -> int:
        if isinstance(x, (str, bytes)):
            raise DomainMismatchError("interval classifier evaluated on a discrete point")
        return int(self.contains(float(x)))

    def indicator(self, xs: np.ndarray) -> np.ndarray:
        """Vectorised membership of a real sample."""
        xs = np.asarray(xs)
        if xs.dtype.kind not in "fiu":
            raise DomainMismatchError("interval classifier evaluated on a discrete sample")
        out = np.zeros(xs.shape, dtype=bool)
        for lo, hi in self.intervals:
            out |= (xs >= lo) & (xs <= hi)
        return out

    def complement(self) -> "IntervalUnion":
        """Closure of the complement (boundary points are null for densities)."""
        out = []
        prev = -math.inf
        for lo, hi in self.intervals:
            if lo > prev:
                out.append((prev, lo))
            prev = hi
        if prev < math.inf:
            out.append((prev, math.inf))
        return IntervalUnion(tuple(out))

    def intersect(self, other: "IntervalUnion") -> "IntervalUnion":
        out = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if lo <= hi:
                    out.append((lo, hi))
        return IntervalUnion(tuple(out))

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.intervals + other.intervals)

    def symmetric_difference(self, other: "IntervalUnion") -> "IntervalUnion":
        left = self.intersect(other.complement())
        right = other.intersect(self.complement())
        return left.union(right)

    def is_bounded(self) -> bool:
        return all(math.isfinite(lo) and math.isfinite(hi) for lo, hi in self.intervals)

    def to_dict(self) -> dict:
        return {
            "kind": "intervals",
            "intervals": [[encode_float(lo), encode_float(hi)] for lo, hi in self.intervals],
        }

    def __repr__(self) -> str:
        if not self.intervals:
            return "IntervalUnion(∅)"
        parts = ", ".join(f"[{lo:g}, {hi:g}]" for lo, hi in self.intervals)
        return f"IntervalUnion({parts})"


@dataclass(frozen=True)
class DiscreteLabeling:
    """A labeling of a finite point set; ``accepted`` holds the points labeled 1."""

    points: tuple[Hashable, ...]
    accepted: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "accepted", frozenset(self.accepted))
        if len(set(self.points)) != len(self.points):
            raise ValueError("duplicate point ids")
        stray = self.accepted - set(self.points)
        if stray:
            raise DomainMismatchError(f"accepted points {sorted(map(str, stray))} not in the domain")

    @classmethod
    def from_bits(cls, points: Iterable[Hashable], bits: Iterable[int]) -> "DiscreteLabeling":
        points = tuple(points)
        return cls(points, frozenset(p for p, b in zip(points, bits) if b))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(int(p in self.accepted) for p in self.points)

    def __call__(self, x: Hashable) -> int:
        if x not in self.points:
            raise DomainMismatchError(f"point {x!r} is not in the labeling's domain")
        return int(x in self.accepted)

    def indicator(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs)
        if xs.dtype.kind in "fc":
            raise DomainMismatchError("discrete labeling evaluated on a real-valued sample")
        if not self.accepted:
            return np.zeros(xs.shape, dtype=bool)
        return np.isin(xs, np.asarray(sorted(self.accepted, key=str)))

    def to_dict(self) -> dict:
        return {"kind": "labeling", "labels": {str(p): int(p in self.accepted) for p in self.points}}

    def __repr__(self) -> str:
        acc = ",".join(str(p) for p in self.points if p in self.accepted)
        return f"DiscreteLabeling({{{acc}}} of {len(self.points)})"


Classifier = Union[IntervalUnion, DiscreteLabeling]


def classifier_from_dict(d: dict) -> Classifier:
    kind = d.get("kind")
    if kind == "intervals":
        return IntervalUnion(tuple((decode_float(a), decode_float(b)) for a, b in d["intervals"]))
    if kind == "labeling":
        labels = d["labels"]
        return DiscreteLabeling(tuple(labels), frozenset(p for p, v in labels.items() if v))
    raise ValueError(f"unknown classifier kind {kind!r}")
