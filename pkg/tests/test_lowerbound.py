import itertools
import math

import mpmath
import numpy as np
import pytest

from nptransfer.errors import ConfigError, PackingError
from nptransfer.lowerbound import (
    C0,
    bernoulli_kl,
    bernoulli_kl_bound_check,
    build_instance,
    gv_packing,
    half_dimension,
    hard_family,
    product_kl,
    verify_instance,
)
from nptransfer.np_oracle import NPProblem, brute_force_solutions

# 0.2 ln(0.6/0.4) at 30 digits: KL(Ber(0.6) || Ber(0.4)) is symmetric in the two terms
KL_06_04 = float(mpmath.mpf("0.2") * mpmath.log(mpmath.mpf("1.5")))


class TestPacking:
    @pytest.mark.parametrize("d", [8, 16, 32])
    def test_size_and_distance(self, d):
        code = gv_packing(d, 0)
        assert code.M >= 2 ** (d // 8)
        dist = code.distances()
        off = dist[~np.eye(code.M, dtype=bool)]
        assert off.min() >= math.ceil(d / 8)
        assert np.all(code.codewords[0] == 1)

    def test_seeded(self):
        a, b = gv_packing(16, 3), gv_packing(16, 3)
        assert np.array_equal(a.codewords, b.codewords)

    def test_impossible_target_raises(self, monkeypatch):
        import nptransfer.lowerbound as lb

        monkeypatch.setattr(lb, "GV_RETRIES", 1000)
        with pytest.raises(PackingError):
            gv_packing(4, 0, min_dist=4, size=3)


class TestBuildInstance:
    def test_c1_masses(self):
        inst = build_instance("C1", 17, 0.25, 0.5, 1.0, [1] * 8)
        assert inst.d == 16
        assert inst.mu0.mass_of("x0") == pytest.approx(0.5)
        assert inst.mu0.mass_of("x1_3") == pytest.approx(1 / 32)
        assert inst.mu1T.mass_of("x1_1") == pytest.approx(1 / 16 + 0.5 / 32)
        for law in (inst.mu0, inst.mu1S, inst.mu1T):
            assert math.fsum(law.masses) == pytest.approx(1.0, abs=1e-15)

    def test_vanishing_perturbation(self):
        inst = build_instance("C1", 17, 0.25, 1e-15, 2.0, [1, -1] * 4)
        masses = [inst.mu1T.mass_of(p) for p in inst.points if p != "x0"]
        assert masses == pytest.approx([1 / 16] * 16, abs=1e-15)

    def test_c2(self):
        for k in (1, -1):
            inst = build_instance("C2", 3, 0.25, 0.4, 1.0, [k])
            assert inst.mu1T.mass_of("x1") == pytest.approx(0.5 + k * 0.2)
            assert inst.mu1T.mass_of("x2") == pytest.approx(0.5 - k * 0.2)

    def test_c3_source_ignores_sign(self):
        a = build_instance("C3", 17, 0.25, 0.5, 2.0, [1] * 8)
        b = build_instance("C3", 17, 0.25, 0.5, 2.0, [-1] * 8)
        assert a.mu1S == b.mu1S and a.mu1T != b.mu1T

    def test_even_dimension_drops_a_point(self):
        assert half_dimension("C1", 18) == 8
        assert build_instance("C1", 18, 0.25, 0.5, 1.0, [1] * 8).d == 16

    def test_parameter_ranges(self):
        with pytest.raises(ConfigError):
            build_instance("C1", 17, 0.6, 0.5, 1.0, [1] * 8)
        with pytest.raises(ConfigError):
            build_instance("C1", 17, 0.25, 1.5, 1.0, [1] * 8)
        with pytest.raises(ConfigError):
            build_instance("C1", 17, 0.25, 0.5, 1.0, [1] * 7)
        with pytest.raises(ConfigError):
            build_instance("C4", 17, 0.25, 0.5, 1.0, [1] * 8)

    @pytest.mark.parametrize("variant", ["C1", "C3"])
    def test_optimal_labeling_closed_form(self, variant):
        code = gv_packing(4, 1, min_dist=1, size=4)
        for w in code.codewords:
            inst = build_instance(variant, 9, 0.25, 0.3, 2.0, w)
            sols = brute_force_solutions(NPProblem(inst.mu0, inst.mu1T, inst.alpha), inst.projected_class())
            assert [s.accepted for s in sols] == [inst.optimal_labeling()]

    @pytest.mark.parametrize("d_H,rho", [(9, 1.0), (9, 2.0), (17, 3.0)])
    def test_gaps_share_an_integer(self, d_H, rho):
        half = half_dimension("C1", d_H)
        d = 2 * half
        eps = 0.4
        sigma = [1, -1] * (half // 2) + [1] * (half % 2)
        inst = build_instance("C1", d_H, 0.25, eps, rho, sigma)
        best = inst.optimal_labeling()
        rt0 = 1 - math.fsum(inst.mu1T.mass_of(p) for p in best)
        rs0 = 1 - math.fsum(inst.mu1S.mass_of(p) for p in best)
        free = [p for p in inst.points if p != "x0"]
        a, w = inst.alpha, 2 * inst.alpha / d
        for acc in itertools.combinations(free, half):
            t1 = math.fsum(inst.mu0.mass_of(p) for p in acc)
            assert a - w < t1 < a + w
            k_t = ((1 - math.fsum(inst.mu1T.mass_of(p) for p in acc)) - rt0) * d / eps
            k_s = ((1 - math.fsum(inst.mu1S.mass_of(p) for p in acc)) - rs0) * d / eps**rho
            assert k_t == pytest.approx(round(k_t), abs=1e-9)
            assert k_s == pytest.approx(k_t, abs=1e-9)


class TestBernoulliKL:
    def test_equal(self):
        assert bernoulli_kl_bound_check(0.1, 0.1) == (0.0, 0.0, True)

    def test_symmetric_example(self):
        exact, bound, holds = bernoulli_kl_bound_check(0.1, -0.1)
        assert exact == pytest.approx(KL_06_04, abs=1e-15)
        assert exact == pytest.approx(0.0810930, abs=5e-8)
        assert bound == pytest.approx(0.24) and holds

    def test_grid(self):
        grid = np.linspace(-0.25, 0.25, 51)
        assert all(bernoulli_kl_bound_check(a, b)[2] for a in grid for b in grid)
        assert C0 == 6.0

    def test_range(self):
        with pytest.raises(ValueError):
            bernoulli_kl_bound_check(0.3, 0.0)

    def test_degenerate(self):
        assert bernoulli_kl(1.0, 1.0) == 0.0
        assert bernoulli_kl(0.5, 1.0) == math.inf

    def test_product(self):
        assert product_kl(10, 0.01, 20, 0.02) == pytest.approx(0.5)


class TestVerifyInstance:
    @pytest.mark.parametrize("variant", ["C1", "C3"])
    @pytest.mark.parametrize("rho", [1.0, 2.0])
    def test_passes_with_small_c1(self, variant, rho):
        fam = hard_family(variant, 17, 0.25, rho, 0, delta=0.3 if variant == "C3" else 0.0)
        rep = verify_instance(fam, 10_000, 10_000, 0.05)
        assert rep.all_pass, rep.failed()
        assert set(rep.checks) == {
            "a_transfer_exponent",
            "b_delta_bound",
            "c_separation",
            "d_kl_budget",
            "e_epsilon_range",
        }

    def test_c2_passes(self):
        rep = verify_instance(hard_family("C2", 17, 0.25, 2.0, 0), 10_000, 10_000, 0.05)
        assert rep.all_pass, rep.failed()

    def test_large_c1_breaks_kl(self):
        rep = verify_instance(hard_family("C1", 17, 0.25, 1.0, 0), 10_000, 10_000, 10.0)
        assert rep.failed() == ["d_kl_budget"]
        assert "pair" in rep.checks["d_kl_budget"].witness

    def test_epsilon_out_of_range(self):
        rep = verify_instance(hard_family("C1", 17, 0.25, 1.0, 0), 10, 10, 10.0)
        assert "e_epsilon_range" in rep.failed()

    def test_c3_source_kl_vanishes(self):
        rep = verify_instance(hard_family("C3", 17, 0.25, 1.0, 0, delta=0.3), 10_000, 10_000, 0.05)
        assert all(row[4] == 0.0 for row in rep.pairs)

    def test_c3_needs_delta(self):
        with pytest.raises(ConfigError):
            hard_family("C3", 17, 0.25, 1.0, 0)

    def test_deterministic(self):
        fam = hard_family("C1", 17, 0.25, 1.0, 4)
        a = verify_instance(fam, 10_000, 10_000, 0.05)
        b = verify_instance(fam, 10_000, 10_000, 0.05)
        assert a.to_dict() == b.to_dict() and a.pairs == b.pairs
