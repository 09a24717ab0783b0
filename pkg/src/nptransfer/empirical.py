"""Constrained empirical risk minimization for Neyman-Pearson classification.

The learner minimizes empirical Type-II error over a hypothesis class subject
to ``empirical Type-I <= alpha + epsilon0 / 2``. Continuous classes are reduced
to finitely many candidates over the pooled sample, so the scan is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptySampleError, InfeasibleError
from .hypothesis import CandidateSet, HypothesisClass
from .regions import Classifier

__all__ = ["ErmConfig", "ErmFit", "epsilon0_of", "constrained_erm", "erm_fit"]

TIE_BREAKS = ("lex",)


@dataclass(frozen=True)
class ErmConfig:
    """Constraint level ``alpha`` and slack ``epsilon0`` (the bound is ``alpha + epsilon0/2``)."""

    alpha: float
    epsilon0: float = 0.0
    tie_break: str = "lex"

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError("alpha must lie in [0, 1)")
        if self.epsilon0 < 0 or math.isnan(self.epsilon0):
            raise ConfigError("epsilon0 must be nonnegative")
        if self.alpha + self.epsilon0 / 2 > 1.0 + 1e-12:
            raise ConfigError("alpha + epsilon0/2 must not exceed 1")
        if self.tie_break not in TIE_BREAKS:
            raise ConfigError(f"unknown tie-break policy {self.tie_break!r}")

    @property
    def bound(self) -> float:
        return self.alpha + self.epsilon0 / 2


@dataclass(frozen=True)
class ErmFit:
    classifier: Classifier
    type1_emp: float
    type2_emp: float
    n_candidates: int


def epsilon0_of(n0: int, d_H: int, delta0: float) -> float:
    """Slack ``sqrt(128 (d ln n0 + ln(8/delta0)) / n0)``.

    ``delta0`` may be anything in (0, 8]; the learner's guarantee needs it in
    (0, 1), larger values only serve algebraic checks.
    """
    if n0 < 2:
        raise EmptySampleError("epsilon0 needs n0 >= 2")
    if not 0.0 < delta0 <= 8.0:
        raise ValueError("delta0 must lie in (0, 8]")
    return math.sqrt(128.0 * (d_H * math.log(n0) + math.log(8.0 / delta0)) / n0)


def _breakpoints(s0, s1) -> np.ndarray:
    a, b = np.asarray(s0), np.asarray(s1)
    if a.dtype.kind in "fiu" and b.dtype.kind in "fiu":
        return np.concatenate([a.astype(float).ravel(), b.astype(float).ravel()])
    return np.empty(0)


def erm_fit(cls: HypothesisClass, s0, s1, cfg: ErmConfig, cands: CandidateSet | None = None) -> ErmFit:
    """Run the constrained scan and return the minimizer with its empirical risks."""
    n0, n1 = len(s0), len(s1)
    if n0 == 0 or n1 == 0:
        raise EmptySampleError("constrained ERM needs nonempty mu0 and mu1 samples")
    if cands is None:
        cands = cls.candidates(_breakpoints(s0, s1))
    acc0 = cands.count_accepted(s0)
    miss1 = n1 - cands.count_accepted(s1)
    # integer comparison avoids rounding a borderline count out of the feasible set
    feasible = acc0 <= cfg.bound * n0 + 1e-9
    if not feasible.any():
        raise InfeasibleError(f"no classifier has empirical Type-I <= {cfg.bound:.6g}")
    idx = np.flatnonzero(feasible)
    keys = cands.keys[idx]
    order = np.lexsort(tuple(keys[:, j] for j in reversed(range(keys.shape[1]))) + (acc0[idx], miss1[idx]))
    best = int(idx[order[0]])
    return ErmFit(cands.classifier(best), float(acc0[best] / n0), float(miss1[best] / n1), len(cands))


def constrained_erm(cls: HypothesisClass, s0, s1, cfg: ErmConfig) -> Classifier:
    """Feasible classifier of least empirical Type-II; raises ``InfeasibleError`` if none."""
    return erm_fit(cls, s0, s1, cfg).classifier
