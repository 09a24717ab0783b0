"""The transfer problem: a shared ``mu0``, source and target rare laws, a level and a class."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping

import numpy as np

from .distributions import Distribution, distribution_from_dict
from .errors import ConfigError, InfeasibleError
from .hypothesis import CandidateSet, HypothesisClass, class_from_dict
from .np_oracle import NPProblem
from .regions import Classifier

__all__ = ["TransferScenario", "EXCESS_TOL"]

EXCESS_TOL = 1e-12


@dataclass(frozen=True)
class TransferScenario:
    mu0: Distribution
    mu1S: Distribution
    mu1T: Distribution
    alpha: float
    cls: HypothesisClass
    r: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        kinds = {self.mu0.is_discrete, self.mu1S.is_discrete, self.mu1T.is_discrete}
        if len(kinds) != 1:
            raise ConfigError("a scenario cannot mix discrete and continuous laws")
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError("alpha must lie in [0, 1)")
        if self.r < 0:
            raise ConfigError("slack r must be nonnegative")

    @property
    def is_discrete(self) -> bool:
        return self.mu0.is_discrete

    @property
    def source(self) -> NPProblem:
        return NPProblem(self.mu0, self.mu1S, self.alpha)

    @property
    def target(self) -> NPProblem:
        return NPProblem(self.mu0, self.mu1T, self.alpha)

    def knots(self) -> list[float]:
        if self.is_discrete:
            return []
        return sorted({k for d in (self.mu0, self.mu1S, self.mu1T) for k in d.knots()})

    @cached_property
    def class_grid(self) -> CandidateSet:
        """512 evenly spaced parameters plus law knots (whole class when finite)."""
        return self.cls.grid(512, self.knots())

    @cached_property
    def _grid_risks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        g = self.class_grid
        type1 = g.masses(self.mu0)
        return type1, np.clip(1.0 - g.masses(self.mu1S), 0, 1), np.clip(1.0 - g.masses(self.mu1T), 0, 1)

    def _class_optimum(self, which: int) -> tuple[Classifier, float]:
        type1, *type2s = self._grid_risks
        type2 = type2s[which]
        ok = type1 <= self.alpha + 1e-12
        if not ok.any():
            raise InfeasibleError("no class member meets the Type-I constraint")
        i = int(np.flatnonzero(ok)[np.argmin(type2[ok])])
        return self.class_grid.classifier(i), float(type2[i])

    @cached_property
    def target_optimum(self) -> tuple[Classifier, float]:
        """Best target Type-II over the class under Type-I <= alpha."""
        return self._class_optimum(1)

    @cached_property
    def source_optimum(self) -> tuple[Classifier, float]:
        return self._class_optimum(0)

    def target_excess(self, h: Classifier) -> float:
        gap = (1.0 - self.mu1T.measure(h)) - self.target_optimum[1]
        # exact risks are sums of floats; gaps below EXCESS_TOL are rounding
        return gap if gap > EXCESS_TOL else 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "mu0": self.mu0.to_dict(),
            "mu1S": self.mu1S.to_dict(),
            "mu1T": self.mu1T.to_dict(),
            "alpha": self.alpha,
            "class": self.cls.to_dict(),
            "r": self.r,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TransferScenario":
        try:
            return cls(
                distribution_from_dict(d["mu0"]),
                distribution_from_dict(d["mu1S"]),
                distribution_from_dict(d["mu1T"]),
                float(d["alpha"]),
                class_from_dict(d["class"]),
                float(d.get("r", 0.0)),
                str(d.get("name", "custom")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad scenario description: {exc}") from exc
