import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from nptransfer.distributions import DiscreteOnPoints, Gaussian, PowerLaw, Triangular, Uniform
from nptransfer.errors import InfeasibleError, NotAchievableError
from nptransfer.hypothesis import AllLabelings, ExplicitList
from nptransfer.lowerbound import build_instance
from nptransfer.np_oracle import (
    NPProblem,
    achievable_threshold,
    brute_force_solutions,
    check_equivalence,
    level_set,
    np_solution,
)
from nptransfer.presets import discrete_support_gap, gaussian_narrow, gaussian_shift, triangular_uniform
from nptransfer.regions import IntervalUnion

Z95 = stats.norm.isf(0.05)


def random_discrete_problem(rng, k, zero_p0=False, zero_p1=False, alpha=None):
    """Random atoms with continuous masses (no ratio ties) and optional null atoms."""
    pts = tuple(f"x{i}" for i in range(k))
    p0, p1 = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
    if zero_p0 and k > 2:
        p0[0] = 0.0
        p0 /= p0.sum()
    if zero_p1 and k > 2:
        p1[-1] = 0.0
        p1 /= p1.sum()
    mu0, mu1 = DiscreteOnPoints(pts, tuple(p0)), DiscreteOnPoints(pts, tuple(p1))
    if alpha is None:
        alpha = float(rng.uniform(0.0, 0.95))
    return NPProblem(mu0, mu1, alpha)


def achievable_alpha(problem, rng):
    """The mu0 mass of a random level set below 1, so alpha is achievable."""
    lams = sorted(m for m in {level_set(problem, lam).mu0_mass for lam in _ratios(problem)} if m < 1 - 1e-9)
    return float(rng.choice(lams)) if lams else 0.0


def _ratios(problem):
    out = []
    for x in problem.mu0.points:
        a, b = problem.mu0.mass_of(x), problem.mu1.mass_of(x)
        out.append(math.inf if a == 0 else b / a)
    return out


def min_type2_brute(problem):
    pts = problem.mu0.points
    best = math.inf
    for bits in range(2 ** len(pts)):
        acc = [p for i, p in enumerate(pts) if bits >> i & 1]
        t1 = math.fsum(problem.mu0.mass_of(p) for p in acc)
        if t1 <= problem.alpha + 1e-12:
            best = min(best, 1 - math.fsum(problem.mu1.mass_of(p) for p in acc))
    return best


class TestLevelSet:
    def test_gaussian_unit_ratio(self):
        res = level_set(NPProblem(Gaussian(0.0, 1.0), Gaussian(2.0, 1.0), 0.05), 1.0)
        (lo, hi), = res.region.intervals
        assert lo == pytest.approx(1.0, abs=1e-12) and hi == math.inf

    def test_zero_level_is_everything(self):
        res = level_set(NPProblem(Gaussian(0.0, 1.0), Uniform(0.0, 1.0), 0.05), 0.0)
        assert res.region == IntervalUnion.everything()
        assert res.mu0_mass == pytest.approx(1.0)

    def test_triangular_uniform(self):
        res = level_set(NPProblem(Triangular(), Uniform(1.0, 2.0), 0.05), 8.0)
        assert res.region == IntervalUnion.of((-math.inf, -2.0), (1.5, math.inf))
        assert res.mu0_mass == pytest.approx(1 / 32, abs=1e-15)

    def test_null_points_always_included(self):
        pts = ("a", "b", "c")
        pr = NPProblem(DiscreteOnPoints(pts, (0.5, 0.5, 0.0)), DiscreteOnPoints(pts, (0.2, 0.8, 0.0)), 0.1)
        assert "c" in level_set(pr, 1e9).region.accepted

    @pytest.mark.parametrize(
        "problem",
        [
            NPProblem(Gaussian(0.0, 1.0), Gaussian(2.0, 1.0), 0.05),
            NPProblem(Gaussian(0.0, 1.0), Gaussian(2.0, 0.25), 0.05),
            NPProblem(Triangular(), Uniform(1.0, 2.0), 0.05),
            NPProblem(Gaussian(-1.0, 1.0), PowerLaw(2.0), 0.1),
        ],
        ids=["shift", "narrow", "triangular", "powerlaw"],
    )
    def test_nested_and_monotone(self, problem):
        lams = np.geomspace(1e-3, 1e3, 25)
        res = [level_set(problem, lam) for lam in lams]
        for small, big in zip(res[:-1], res[1:]):
            assert big.mu0_mass <= small.mu0_mass + 1e-12
            assert problem.mu0.measure(big.region.intersect(small.region.complement())) <= 1e-9

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 8))
    def test_discrete_nested(self, seed, k):
        pr = random_discrete_problem(np.random.default_rng(seed), k, zero_p0=seed % 2 == 0)
        lams = sorted(set(_ratios(pr)) - {math.inf}) + [math.inf]
        for a, b in zip(lams[:-1], lams[1:]):
            assert level_set(pr, b).region.accepted <= level_set(pr, a).region.accepted


class TestAchievability:
    def test_gaussian_vs_uniform_boundary_at_zero(self):
        mu0 = Gaussian(-1.0, 1.0)
        alpha = mu0.measure(IntervalUnion.of((0.0, 1.0)))
        pr = NPProblem(mu0, Uniform(0.0, 1.0), alpha)
        res = level_set(pr, achievable_threshold(pr))
        (lo, hi), = res.region.intervals
        assert lo == pytest.approx(0.0, abs=1e-12) and hi == pytest.approx(1.0)

    def test_discrete_uniform_quarter(self):
        pts = ("a", "b", "c", "d")
        pr = NPProblem(DiscreteOnPoints(pts, (0.25,) * 4), DiscreteOnPoints(pts, (0.1, 0.2, 0.3, 0.4)), 0.25)
        lam = achievable_threshold(pr)
        assert level_set(pr, lam).region.accepted == frozenset({"d"})
        assert level_set(pr, lam).mu0_mass == pytest.approx(0.25)

    def test_discrete_unattainable(self):
        pts = ("a", "b", "c", "d")
        pr = NPProblem(DiscreteOnPoints(pts, (0.25,) * 4), DiscreteOnPoints(pts, (0.1, 0.2, 0.3, 0.4)), 0.3)
        assert achievable_threshold(pr) is None

    def test_plateau_is_not_achievable(self):
        pr = NPProblem(Uniform(0.0, 1.0), Uniform(0.0, 1.0), 0.5)
        assert achievable_threshold(pr) is None
        with pytest.raises(NotAchievableError):
            np_solution(pr)

    @pytest.mark.parametrize("alpha", [1e-8, 1e-4, 0.01, 0.3, 0.9])
    def test_gaussian_mass_exact(self, alpha):
        pr = NPProblem(Gaussian(0.0, 1.0), Gaussian(1.5, 1.0), alpha)
        res = level_set(pr, achievable_threshold(pr))
        assert res.mu0_mass == pytest.approx(alpha, rel=1e-9)


class TestNPSolution:
    def test_gaussian(self):
        h, t1, t2 = np_solution(NPProblem(Gaussian(0.0, 1.0), Gaussian(2.0, 1.0), 0.05))
        (lo, hi), = h.intervals
        assert lo == pytest.approx(Z95, abs=1e-10)
        assert t1 == pytest.approx(0.05, abs=1e-12)
        assert t2 == pytest.approx(stats.norm.cdf(Z95 - 2), abs=1e-10)
        assert t2 == pytest.approx(0.3613, abs=1e-4)

    def test_uniform_target_region(self):
        mu0 = Gaussian(-1.0, 1.0)
        alpha = mu0.measure(IntervalUnion.of((0.0, 1.0)))
        h, _, t2 = np_solution(NPProblem(mu0, Uniform(0.0, 1.0), alpha))
        (lo, hi), = h.intervals
        assert (lo, hi) == pytest.approx((0.0, 1.0), abs=1e-12)
        assert t2 == 0.0

    def test_three_point_instance(self):
        inst = build_instance("C2", 3, 0.25, 0.5, 1.0, [1])
        h, _, _ = np_solution(NPProblem(inst.mu0, inst.mu1T, inst.alpha))
        assert "x1" in h.accepted and "x2" not in h.accepted
        sols = brute_force_solutions(NPProblem(inst.mu0, inst.mu1T, inst.alpha), AllLabelings(inst.points))
        assert all("x1" in s.accepted and "x2" not in s.accepted for s in sols)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 12))
    def test_optimal_against_all_labelings(self, seed, k):
        rng = np.random.default_rng(seed)
        pr = random_discrete_problem(rng, k, zero_p0=seed % 3 == 0, zero_p1=seed % 5 == 0)
        pr = NPProblem(pr.mu0, pr.mu1, achievable_alpha(pr, rng))
        _, t1, t2 = np_solution(pr)
        assert t1 == pytest.approx(pr.alpha, abs=1e-12)
        assert t2 == pytest.approx(min_type2_brute(pr), abs=1e-12)


class TestBruteForce:
    def test_support_gap_under_U_and_Ustar(self):
        sc = discrete_support_gap()
        target_best = min(1 - sc.mu1T.measure(h) for h in brute_force_solutions(sc.target))
        loose = brute_force_solutions(sc.source)
        tight = brute_force_solutions(sc.source, restrict_Ustar=True)
        assert any(1 - sc.mu1T.measure(h) > target_best + 1e-12 for h in loose)
        t_tight = min(1 - sc.mu1T.measure(h) for h in brute_force_solutions(sc.target, restrict_Ustar=True))
        assert all(1 - sc.mu1T.measure(h) <= t_tight + 1e-12 for h in tight)

    def test_alpha_zero(self):
        pts = ("a", "b", "c")
        pr = NPProblem(DiscreteOnPoints(pts, (0.2, 0.3, 0.5)), DiscreteOnPoints(pts, (0.6, 0.3, 0.1)), 0.0)
        sols = brute_force_solutions(pr)
        assert [s.accepted for s in sols] == [frozenset()]

    def test_singleton_class(self):
        pr = NPProblem(Gaussian(0.0, 1.0), Gaussian(2.0, 1.0), 0.05)
        h, _, _ = np_solution(pr)
        assert brute_force_solutions(pr, ExplicitList((h,), declared_vc_dim=0)) == [h]

    def test_infeasible(self):
        pr = NPProblem(Gaussian(0.0, 1.0), Gaussian(2.0, 1.0), 0.05)
        with pytest.raises(InfeasibleError):
            brute_force_solutions(pr, ExplicitList((IntervalUnion.everything(),), declared_vc_dim=0))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 9))
    def test_uniqueness_on_positive_atoms(self, seed, k):
        rng = np.random.default_rng(seed)
        pr = random_discrete_problem(rng, k, zero_p0=True, zero_p1=seed % 2 == 0)
        pr = NPProblem(pr.mu0, pr.mu1, achievable_alpha(pr, rng))
        sols = [h for h in brute_force_solutions(pr, restrict_Ustar=True) if abs(pr.mu0.measure(h) - pr.alpha) <= 1e-12]
        charged = [x for x in pr.mu0.points if pr.mu0.mass_of(x) + pr.mu1.mass_of(x) > 0]
        for h in sols:
            for g in sols:
                assert all((x in h.accepted) == (x in g.accepted) for x in charged)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 9))
    def test_no_free_power(self, seed, k):
        rng = np.random.default_rng(seed)
        pr = random_discrete_problem(rng, k, zero_p0=seed % 2 == 0, zero_p1=seed % 3 == 0)
        pr = NPProblem(pr.mu0, pr.mu1, achievable_alpha(pr, rng))
        for h in brute_force_solutions(pr):
            t1, t2 = pr.mu0.measure(h), 1 - pr.mu1.measure(h)
            assert not (t1 < pr.alpha - 1e-12 and t2 <= 1e-12)


class TestEquivalence:
    @pytest.mark.parametrize("alpha", [0.01, 0.05, 0.1, 0.2, 0.5])
    def test_equal_variance_gaussians(self, alpha):
        sc = gaussian_shift(alpha)
        assert check_equivalence(sc.source, sc.target).verdict == "equivalent"

    def test_narrow_target(self):
        sc = gaussian_narrow(0.05)
        res = check_equivalence(sc.source, sc.target)
        assert res.verdict == "not-equivalent"
        assert res.witness is not None and res.witness.is_bounded()

    def test_identical_problems(self):
        pr = NPProblem(Gaussian(0.0, 1.0), Gaussian(1.0, 2.0), 0.1)
        assert check_equivalence(pr, pr).verdict == "equivalent"
        sc = discrete_support_gap()
        assert check_equivalence(sc.source, sc.source).verdict == "equivalent"

    def test_discrete_support_gap(self):
        sc = discrete_support_gap()
        assert check_equivalence(sc.source, sc.target, restrict_Ustar=True).verdict == "equivalent"
        res = check_equivalence(sc.source, sc.target, restrict_Ustar=False)
        assert res.verdict == "not-equivalent"
        assert "d" not in res.witness.accepted

    def test_triangular_uniform(self):
        sc = triangular_uniform()
        assert check_equivalence(sc.source, sc.target, restrict_Ustar=True).verdict == "equivalent"
        assert check_equivalence(sc.source, sc.target, restrict_Ustar=False).verdict == "not-equivalent"

    def test_triangular_uniform_at_sixteenth_is_undecided(self):
        sc = triangular_uniform(1 / 16)
        assert check_equivalence(sc.source, sc.target, restrict_Ustar=True).verdict == "undecided"

    def test_source_not_achievable(self):
        pr = NPProblem(Uniform(0.0, 1.0), Uniform(0.0, 1.0), 0.5)
        with pytest.raises(NotAchievableError):
            check_equivalence(pr, pr)

    def test_mismatched_alpha(self):
        a = NPProblem(Gaussian(0.0, 1.0), Gaussian(1.0, 1.0), 0.1)
        b = NPProblem(Gaussian(0.0, 1.0), Gaussian(1.0, 1.0), 0.2)
        with pytest.raises(ValueError):
            check_equivalence(a, b)
