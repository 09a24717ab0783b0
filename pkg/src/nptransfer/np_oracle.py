"""Exact population Neyman-Pearson solutions.

Level sets ``{p1/p0 >= lam}`` follow the convention that a zero denominator
gives an infinite ratio, so every point outside the support of ``mu0`` is
accepted. On the line the set is recovered from a dense log-density profile
whose sign changes are refined by bisection; on finite domains it is read off
atom by atom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .distributions import ContinuousDistribution, DiscreteOnPoints, Distribution
from .errors import DomainMismatchError, InfeasibleError, NotAchievableError
from .hypothesis import AllLabelings, HypothesisClass
from .regions import Classifier, DiscreteLabeling, IntervalUnion, encode_float

__all__ = [
    "NPProblem",
    "LevelSetResult",
    "EquivalenceResult",
    "level_set",
    "achievable_threshold",
    "np_solution",
    "brute_force_solutions",
    "check_equivalence",
    "region_where",
    "common_points",
]

MASS_TOL = 1e-9
_LOG_LAMBDA_RANGE = (-745.0, 709.0)
_PIECE_POINTS = 600


@dataclass(frozen=True)
class NPProblem:
    mu0: Distribution
    mu1: Distribution
    alpha: float

    def __post_init__(self):
        if self.mu0.is_discrete != self.mu1.is_discrete:
            raise DomainMismatchError("a problem cannot mix discrete and continuous laws")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")

    @property
    def is_discrete(self) -> bool:
        return self.mu0.is_discrete


@dataclass(frozen=True)
class LevelSetResult:
    lam: float
    region: Classifier
    mu0_mass: float

    def to_dict(self) -> dict:
        return {"lambda": encode_float(self.lam), "region": self.region.to_dict(), "mu0_mass": self.mu0_mass}


@dataclass(frozen=True)
class EquivalenceResult:
    verdict: str  # "equivalent", "not-equivalent" or "undecided"
    witness: Classifier | None = None
    lam_source: float | None = None
    lam_target: float | None = None
    detail: str = ""

    @property
    def equivalent(self) -> bool:
        return self.verdict == "equivalent"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "lambda_source": None if self.lam_source is None else encode_float(self.lam_source),
            "lambda_target": None if self.lam_target is None else encode_float(self.lam_target),
            "detail": self.detail,
        }


# --------------------------------------------------------------- line profile


@lru_cache(maxsize=256)
def _grid(laws: tuple[ContinuousDistribution, ...]) -> np.ndarray:
    lo = min(d.window()[0] for d in laws)
    hi = max(d.window()[1] for d in laws)
    pad = 1.0 + 0.1 * (hi - lo)
    cuts = sorted({lo - pad, hi + pad, *(k for d in laws for k in d.knots())})
    pieces = [np.linspace(a, b, _PIECE_POINTS) for a, b in zip(cuts[:-1], cuts[1:])]
    return np.unique(np.concatenate(pieces))


def region_where(pred: Callable[[np.ndarray], np.ndarray], laws: Sequence[ContinuousDistribution]) -> IntervalUnion:
    """Closed interval union approximating ``{x : pred(x)}``.

    ``pred`` must be vectorised and piecewise constant with finitely many
    switches, each resolved to a few ulps. The label of the outermost grid
    cells is extended to infinity.
    """
    xs = _grid(tuple(laws))
    flags = np.asarray(pred(xs), dtype=bool)

    def switch(a: float, b: float, fa: bool) -> tuple[float, float]:
        # returns the last point with label fa and the first with the other
        for _ in range(200):
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            if bool(pred(np.array([m]))[0]) == fa:
                a = m
            else:
                b = m
        return a, b

    intervals = []
    start = -math.inf if flags[0] else None
    changes = np.flatnonzero(flags[1:] != flags[:-1])
    for i in changes:
        a, b = switch(float(xs[i]), float(xs[i + 1]), bool(flags[i]))
        if flags[i]:
            intervals.append((start, a))
            start = None
        else:
            start = b
    if start is not None:
        intervals.append((start, math.inf))
    return IntervalUnion(tuple(intervals))


def _ratio_pred(mu0: ContinuousDistribution, mu1: ContinuousDistribution, lam: float):
    log_lam = -math.inf if lam == 0 else (math.inf if math.isinf(lam) else math.log(lam))

    def pred(x):
        with np.errstate(invalid="ignore", divide="ignore"):
            lp0 = mu0.logpdf(x)
            lp1 = mu1.logpdf(x)
            return (lp0 == -np.inf) | (lp1 - lp0 >= log_lam)

    return pred


# ------------------------------------------------------------ discrete helpers


def common_points(*laws: DiscreteOnPoints) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for law in laws:
        for p in law.points:
            seen.setdefault(p, None)
    return tuple(seen)


def _discrete_ratios(problem: NPProblem, points: Sequence[str]) -> np.ndarray:
    p0 = problem.mu0.as_dict()
    p1 = problem.mu1.as_dict()
    out = []
    for x in points:
        a, b = p0.get(x, 0.0), p1.get(x, 0.0)
        out.append(math.inf if a == 0.0 else b / a)
    return np.array(out)


# -------------------------------------------------------------------- public


def level_set(problem: NPProblem, lam: float, points: Sequence[str] | None = None) -> LevelSetResult:
    """The region ``{x : p1(x)/p0(x) >= lam}`` with ``c/0 = inf``."""
    if lam < 0 or math.isnan(lam):
        raise ValueError("lambda must be nonnegative")
    if problem.is_discrete:
        pts = tuple(points) if points is not None else common_points(problem.mu0, problem.mu1)
        ratios = _discrete_ratios(problem, pts)
        region = DiscreteLabeling(pts, frozenset(p for p, r in zip(pts, ratios) if r >= lam))
    else:
        if lam == 0:
            region = IntervalUnion.everything()
        else:
            region = region_where(_ratio_pred(problem.mu0, problem.mu1, lam), (problem.mu0, problem.mu1))
    return LevelSetResult(lam, region, problem.mu0.measure(region))


def achievable_threshold(problem: NPProblem) -> float | None:
    """A ``lam`` with ``mu0(L_lam) = alpha``, or ``None`` when none exists."""
    alpha = problem.alpha
    if alpha == 0.0:
        # L_inf = {p0 = 0} is mu0-null
        return math.inf
    if problem.is_discrete:
        pts = common_points(problem.mu0, problem.mu1)
        ratios = _discrete_ratios(problem, pts)
        p0 = problem.mu0.as_dict()
        levels = sorted(set(ratios.tolist()), reverse=True)
        for r in levels:
            mass = math.fsum(p0.get(p, 0.0) for p, q in zip(pts, ratios) if q >= r)
            if abs(mass - alpha) <= 1e-12:
                return r
        return None

    def mass(u: float) -> float:
        return level_set(problem, math.exp(u)).mu0_mass

    lo, hi = _LOG_LAMBDA_RANGE
    m_lo = mass(lo)
    if m_lo < alpha - MASS_TOL:
        return None  # mu0(L_lam) jumps over alpha at lam = 0
    if mass(hi) >= alpha - 1e-15:
        return math.exp(hi)
    while hi - lo > 1e-13 * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if mass(mid) >= alpha - 1e-15:
            lo = mid
        else:
            hi = mid
    m_lo, m_hi = mass(lo), mass(hi)
    if abs(m_lo - alpha) <= MASS_TOL:
        return math.exp(lo)
    if abs(m_hi - alpha) <= MASS_TOL:
        return math.exp(hi)
    return None


def np_solution(problem: NPProblem) -> tuple[Classifier, float, float]:
    """Indicator of the alpha-level set with its exact (Type-I, Type-II)."""
    lam = achievable_threshold(problem)
    if lam is None:
        raise NotAchievableError(
            f"alpha={problem.alpha} is not achievable by a level set; "
            "use brute_force_solutions over a finite class instead"
        )
    res = level_set(problem, lam)
    type2 = max(0.0, 1.0 - problem.mu1.measure(res.region))
    return res.region, res.mu0_mass, type2


def _ustar_forced(problem_laws: Sequence[Distribution], points: Sequence[str]) -> frozenset:
    p0 = problem_laws[0].as_dict()
    return frozenset(p for p in points if p0.get(p, 0.0) == 0.0)


def brute_force_solutions(
    problem: NPProblem,
    cls: HypothesisClass | None = None,
    restrict_Ustar: bool = False,
    tol: float = 1e-12,
) -> list[Classifier]:
    """All minimizers of Type-II over ``cls`` subject to Type-I <= alpha.

    ``cls`` defaults to every labeling of the problem's atoms. With
    ``restrict_Ustar`` only classifiers accepting every ``p0 = 0`` point
    are considered.
    """
    if cls is None:
        if not problem.is_discrete:
            raise DomainMismatchError("a default class exists only for discrete problems")
        cls = AllLabelings(common_points(problem.mu0, problem.mu1))
    if restrict_Ustar and problem.is_discrete:
        pts = cls.points if isinstance(cls, AllLabelings) else common_points(problem.mu0, problem.mu1)
        forced = _ustar_forced([problem.mu0], pts)
    else:
        forced = frozenset()
    if restrict_Ustar and not problem.is_discrete:
        raise DomainMismatchError("the U* restriction is only modeled on discrete domains")

    if problem.is_discrete:
        cands = cls.candidates()
    else:
        knots = sorted({k for d in (problem.mu0, problem.mu1) for k in d.knots()})
        cands = cls.grid(512, knots)
    type1 = cands.masses(problem.mu0)
    type2 = np.clip(1.0 - cands.masses(problem.mu1), 0.0, 1.0)
    ok = type1 <= problem.alpha + tol
    if forced:
        rows = [cands.classifier(i) for i in range(len(cands))]
        ok &= np.array([forced <= h.accepted for h in rows])
    if not ok.any():
        raise InfeasibleError("no classifier in the class meets the Type-I constraint")
    best = type2[ok].min()
    keep = np.flatnonzero(ok & (type2 <= best + tol))
    return [cands.classifier(int(i)) for i in keep]


def check_equivalence(
    source: NPProblem,
    target: NPProblem,
    restrict_Ustar: bool = False,
    tol: float = MASS_TOL,
) -> EquivalenceResult:
    """Decide whether every source solution also solves the target problem."""
    if source.mu0 != target.mu0 or source.alpha != target.alpha:
        raise ValueError("source and target must share mu0 and alpha")
    if source.is_discrete != target.is_discrete:
        raise DomainMismatchError("source and target live on different domains")
    if source.is_discrete:
        return _check_discrete(source, target, restrict_Ustar, tol)
    return _check_continuous(source, target, restrict_Ustar, tol)


def _check_discrete(source, target, restrict_Ustar, tol):
    pts = common_points(source.mu0, source.mu1, target.mu1)
    cls = AllLabelings(pts)
    sols_s = brute_force_solutions(source, cls, restrict_Ustar)
    sols_t = brute_force_solutions(target, cls, restrict_Ustar)
    target_bits = {h.bits for h in sols_t}
    for h in sols_s:
        if h.bits not in target_bits:
            return EquivalenceResult(
                "not-equivalent", witness=h, detail="a source solution is not optimal for the target"
            )
    return EquivalenceResult("equivalent", detail=f"{len(sols_s)} source solutions, all target-optimal")


def _check_continuous(source, target, restrict_Ustar, tol):
    lam_s = achievable_threshold(source)
    if lam_s is None:
        raise NotAchievableError(f"alpha={source.alpha} is not achievable for the source problem")
    region_s = level_set(source, lam_s).region
    mu0, mu1s, mu1t = source.mu0, source.mu1, target.mu1
    laws = (mu0, mu1s, mu1t)

    if not restrict_Ustar:
        # Source solutions are free on {p0 = 0, p1S = 0}; if the target puts
        # mass there, dropping that set keeps source optimality only.
        def null_pred(x):
            return (mu0.pdf(x) == 0) & (mu1s.pdf(x) == 0)

        z = region_where(null_pred, laws)
        if mu1t.measure(z) > tol:
            witness = region_s.intersect(z.complement())
            return EquivalenceResult(
                "not-equivalent",
                witness=witness,
                lam_source=lam_s,
                detail="target mass on the set where both mu0 and the source rare law vanish",
            )

    lam_t = achievable_threshold(target)
    if lam_t is None:
        return EquivalenceResult(
            "undecided", lam_source=lam_s, detail="alpha is not achievable for the target problem"
        )
    region_t = level_set(target, lam_t).region
    diff = region_s.symmetric_difference(region_t)
    gap = sum(d.measure(diff) for d in laws)
    if gap < tol:
        return EquivalenceResult("equivalent", witness=region_t, lam_source=lam_s, lam_target=lam_t)
    return EquivalenceResult(
        "not-equivalent",
        witness=region_t,
        lam_source=lam_s,
        lam_target=lam_t,
        detail=f"level sets differ on mass {gap:.3g}",
    )
