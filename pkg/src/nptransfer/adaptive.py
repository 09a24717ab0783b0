"""Adaptive choice between source-trained and target-trained NP classifiers.

Both learners share one ``mu0`` sample and one empirical constraint. The
source hypothesis is kept unless its empirical target Type-II exceeds that of
the target hypothesis by more than ``c * sqrt(A_{n_T})``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .distributions import make_rng
from .empirical import ErmConfig, epsilon0_of, erm_fit
from .errors import ConfigError, EmptySampleError
from .hypothesis import empirical_risks
from .regions import Classifier
from .scenario import TransferScenario

__all__ = [
    "AdaptiveConfig",
    "TrialResult",
    "complexity_term",
    "adaptive_select",
    "run_adaptive",
    "trial_streams",
    "LEARNERS",
]

LEARNERS = ("adaptive", "source", "target")


@dataclass(frozen=True)
class AdaptiveConfig:
    c: float = 1.0
    delta: float = 0.05
    delta0: float = 0.05

    def __post_init__(self):
        if not self.c > 0:
            raise ConfigError("c must be positive")
        if not (0.0 < self.delta < 1.0 and 0.0 < self.delta0 < 1.0):
            raise ConfigError("delta and delta0 must lie in (0, 1)")


@dataclass(frozen=True)
class TrialResult:
    scenario: str
    n0: int
    n_s: int
    n_t: int
    seed: int
    chose_source: int
    excess_target: float
    type1_true: float
    type1_emp: float
    epsilon0: float
    a_ns: float
    a_nt: float
    margin: float
    status: str = "ok"

    def to_dict(self) -> dict:
        return asdict(self)


def complexity_term(n: int, d_H: int, delta: float) -> float:
    """``A_n = (d/n) ln(max(n, d)/d) + (1/n) ln(1/delta)``; the first term is 0 when d = 0."""
    if n < 1:
        raise ValueError("complexity term needs n >= 1")
    first = 0.0 if d_H == 0 else d_H / n * math.log(max(n, d_H) / d_H)
    return first + math.log(1.0 / delta) / n


def adaptive_select(
    h_source: Classifier,
    h_target: Classifier,
    s1T,
    cfg: AdaptiveConfig,
    n_T: int,
    d_H: int,
) -> tuple[Classifier, int, float]:
    """Return ``(h, chose_source, margin)`` where ``margin = difference - threshold``."""
    if len(s1T) == 0:
        raise EmptySampleError("the selection rule needs a target rare-class sample")
    if len(s1T) != n_T:
        raise ValueError("n_T must equal the target sample size")
    _, r_s = empirical_risks(h_source, None, s1T)
    _, r_t = empirical_risks(h_target, None, s1T)
    margin = (r_s - r_t) - cfg.c * math.sqrt(complexity_term(n_T, d_H, cfg.delta))
    if margin <= 0:
        return h_source, 1, margin
    return h_target, 0, margin


def trial_streams(seed: int, n0: int, n_s: int, n_t: int) -> list[np.random.Generator]:
    """Three independent generators (mu0, source, target) keyed on the grid cell."""
    root = np.random.SeedSequence([int(seed), int(n0), int(n_s), int(n_t)])
    return [make_rng(child) for child in root.spawn(3)]


def run_adaptive(
    scenario: TransferScenario,
    n0: int,
    n_S: int,
    n_T: int,
    cfg: AdaptiveConfig = AdaptiveConfig(),
    seed: int = 0,
    learner: str = "adaptive",
    erm_slack: float | None = None,
) -> TrialResult:
    """One trial: sample, fit, select, and score exactly against the population.

    ``learner`` picks the adaptive rule or one of its two ingredients.
    ``erm_slack`` replaces the formula slack ``epsilon0`` inside the ERM
    constraint; the reported ``epsilon0`` column always holds the formula
    value. With ``n_S = 0`` the adaptive rule reduces to target-only ERM.
    """
    if learner not in LEARNERS:
        raise ConfigError(f"learner must be one of {LEARNERS}")
    if n0 < 2:
        raise EmptySampleError("n0 must be at least 2")
    d = scenario.cls.vc_dim
    g0, gS, gT = trial_streams(seed, n0, n_S, n_T)
    s0 = scenario.mu0.sample(g0, n0)
    s1S = scenario.mu1S.sample(gS, n_S)
    s1T = scenario.mu1T.sample(gT, n_T)

    eps0 = epsilon0_of(n0, d, cfg.delta0)
    slack = eps0 if erm_slack is None else float(erm_slack)
    # a bound at or above 1 never binds, so the slack is capped there
    erm_cfg = ErmConfig(scenario.alpha, min(slack, 2.0 * (1.0 - scenario.alpha)))
    a_ns = complexity_term(n_S, d, cfg.delta) if n_S > 0 else math.nan
    a_nt = complexity_term(n_T, d, cfg.delta) if n_T > 0 else math.nan

    margin = math.nan
    use_source = learner == "source" or (learner == "adaptive" and n_S > 0)
    use_target = learner == "target" or learner == "adaptive"
    fit_s = erm_fit(scenario.cls, s0, s1S, erm_cfg) if use_source else None
    fit_t = erm_fit(scenario.cls, s0, s1T, erm_cfg) if use_target else None

    if learner == "adaptive" and fit_s is not None:
        h, chose, margin = adaptive_select(fit_s.classifier, fit_t.classifier, s1T, cfg, n_T, d)
        fit = fit_s if chose else fit_t
    elif fit_s is not None:
        fit, chose = fit_s, 1
    else:
        fit, chose = fit_t, 0

    h = fit.classifier
    return TrialResult(
        scenario=scenario.name,
        n0=n0,
        n_s=n_S,
        n_t=n_T,
        seed=seed,
        chose_source=chose,
        excess_target=scenario.target_excess(h),
        type1_true=scenario.mu0.measure(h),
        type1_emp=fit.type1_emp,
        epsilon0=eps0,
        a_ns=a_ns,
        a_nt=a_nt,
        margin=margin,
    )
