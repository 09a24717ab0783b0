"""Outlier transfer exponent and coefficient.

For classifiers within Type-I slack ``r`` the transfer condition reads

    C * max(0, R_S(h) - R_S(hS)) >= max(0, R_T(h) - R_T(hS)) ** rho

where ``hS`` is the source solution with the worst target Type-II. On a
finite set of classifiers the least admissible coefficient for a given
``rho`` is ``C(rho) = max tau**rho / s`` over pairs (s, tau); it is
nonincreasing in ``rho`` because every ``tau <= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InfeasibleError, OutOfSlackError
from .regions import Classifier, encode_float
from .scenario import TransferScenario

__all__ = [
    "TransferScenario",
    "ExponentFit",
    "worst_source_solution",
    "delta_of",
    "excess_pair",
    "excess_pairs",
    "coefficient_for",
    "fit_exponent",
    "RHO_CAP",
    "C_CAP",
]

RHO_CAP = 64.0
C_CAP = 1e6
_INEQ_SLACK = 1e-12


@dataclass(frozen=True)
class ExponentFit:
    rho_hat: float
    C_hat: float
    c_max: float
    n_grid: int
    witness: Classifier | None = None

    def to_dict(self) -> dict:
        return {
            "rho_hat": encode_float(self.rho_hat),
            "C_hat": encode_float(self.C_hat),
            "c_max": self.c_max,
            "n_grid": self.n_grid,
            "witness": None if self.witness is None else self.witness.to_dict(),
        }


def worst_source_solution(scenario: TransferScenario, tol: float = 1e-12) -> Classifier:
    """Source solution over the class grid with the largest target Type-II.

    Ties keep the first candidate in the grid's lexicographic order.
    """
    type1, type2_s, type2_t = scenario._grid_risks
    ok = type1 <= scenario.alpha + tol
    if not ok.any():
        raise InfeasibleError("the source problem has no feasible class member")
    best = type2_s[ok].min()
    sols = np.flatnonzero(ok & (type2_s <= best + tol))
    pick = sols[np.argmax(type2_t[sols])]
    return scenario.class_grid.classifier(int(pick))


def delta_of(scenario: TransferScenario) -> float:
    """Target excess of the worst source solution."""
    return scenario.target_excess(worst_source_solution(scenario))


def excess_pair(scenario: TransferScenario, h: Classifier, check_slack: bool = True) -> tuple[float, float]:
    """Clamped (source excess, target excess) of ``h`` relative to the worst source solution."""
    return excess_pairs(scenario, [h], check_slack)[0]


def excess_pairs(
    scenario: TransferScenario, hs: Sequence[Classifier], check_slack: bool = True
) -> list[tuple[float, float]]:
    hS = worst_source_solution(scenario)
    base_s = 1.0 - scenario.mu1S.measure(hS)
    base_t = 1.0 - scenario.mu1T.measure(hS)
    out = []
    for h in hs:
        if check_slack:
            t1 = scenario.mu0.measure(h)
            if t1 > scenario.alpha + scenario.r + _INEQ_SLACK:
                raise OutOfSlackError(f"Type-I {t1:.6g} exceeds alpha + r = {scenario.alpha + scenario.r:.6g}")
        s = max(0.0, (1.0 - scenario.mu1S.measure(h)) - base_s)
        t = max(0.0, (1.0 - scenario.mu1T.measure(h)) - base_t)
        out.append((s, t))
    return out


def coefficient_for(pairs: np.ndarray, rho: float) -> float:
    """Least ``C`` with ``C * s >= tau**rho`` on every pair; ``inf`` if some ``s = 0 < tau``."""
    s, tau = pairs[:, 0], pairs[:, 1]
    live = tau > 0
    if not live.any():
        return 0.0
    if np.any(s[live] == 0):
        return math.inf
    return float(np.max(tau[live] ** rho / s[live]))


def fit_exponent(
    scenario: TransferScenario,
    h_grid: Sequence[Classifier] | None = None,
    check_slack: bool = True,
    c_max: float = 1.0,
    tol: float = 1e-3,
) -> ExponentFit:
    """Smallest ``rho`` in [1, RHO_CAP] whose least coefficient is at most ``c_max``.

    ``c_max = 1`` is the normalization under which the exponent is unique on
    a finite grid; ``c_max = C_CAP`` asks only for a bounded coefficient.
    ``h_grid`` defaults to the in-slack members of the class grid.
    """
    if not 0 < c_max <= C_CAP:
        raise ValueError(f"c_max must lie in (0, {C_CAP:g}]")
    if h_grid is None:
        g = scenario.class_grid
        t1 = scenario._grid_risks[0]
        keep = np.flatnonzero(t1 <= scenario.alpha + scenario.r + _INEQ_SLACK) if check_slack else range(len(g))
        h_grid = [g.classifier(int(i)) for i in keep]
    h_grid = list(h_grid)
    if not h_grid:
        raise ValueError("fit_exponent needs a nonempty grid")
    pairs = np.array(excess_pairs(scenario, h_grid, check_slack), dtype=float)
    bound = c_max * (1 + _INEQ_SLACK)

    def ok(rho):
        return coefficient_for(pairs, rho) <= bound

    if ok(1.0):
        return ExponentFit(1.0, coefficient_for(pairs, 1.0), c_max, len(h_grid))
    ladder = np.geomspace(1.0, RHO_CAP, 25)
    hit = next((k for k in range(1, len(ladder)) if ok(ladder[k])), None)
    if hit is None:
        c = coefficient_for(pairs, RHO_CAP)
        worst = int(np.argmax(np.where(pairs[:, 1] > 0, pairs[:, 1] ** RHO_CAP / np.maximum(pairs[:, 0], 1e-300), 0)))
        return ExponentFit(math.inf, math.inf if c > C_CAP else c, c_max, len(h_grid), h_grid[worst])
    lo, hi = float(ladder[hit - 1]), float(ladder[hit])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return ExponentFit(hi, coefficient_for(pairs, hi), c_max, len(h_grid))
