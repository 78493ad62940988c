import decimal
import math
import random

import pytest

from primearcs.circle import ProblemInstance
from primearcs.errors import ValidationError
from primearcs.search import (brute_force_solutions, count_bound_report,
                              find_solutions, residual, admissible_threshold,
                              weighted_solution_sum)


@pytest.fixture(scope="module")
def exact_inst():
    return ProblemInstance(1.0, 2.0, -1.0, k=2.0, varpi=0.0)


def triples(report):
    return [(r.p1, r.p2, r.p3) for r in report.records]


class TestFindSolutions:
    def test_exact_hit(self, exact_inst, table):
        rep = find_solutions(exact_inst, table, 40.0, 0.0)
        assert (17, 2, 5) in triples(rep)
        for r in rep.records:
            assert r.residual == 0.0

    def test_integer_residuals_exact(self, exact_inst, table):
        rep = find_solutions(exact_inst, table, 40.0, 0.0)
        for r in rep.records:
            assert r.p1 + 2 * r.p2 ** 2 - r.p3 ** 2 == 0

    def test_exact_hit_measure_zero_for_irrational(self, table):
        inst = ProblemInstance(1.0, -math.sqrt(2.0), -1.0, k=1.37, varpi=0.0)
        rep = find_solutions(inst, table, 800.0, 0.0)
        assert rep.count == 0

    def test_same_sign_no_solutions(self, table):
        inst = ProblemInstance(1.0, 2.0, 1.0, k=1.1, varpi=0.0)
        thr = 0.9 * inst.delta * 300.0  # below delta X min|lambda|
        rep = find_solutions(inst, table, 300.0, thr)
        assert rep.count == 0

    def test_empty_window_diagnostic(self, table):
        inst = ProblemInstance(1.0, -1.0, 1.0, k=1.05, varpi=0.0, delta=0.9)
        rep = find_solutions(inst, table, 4.0, 0.1)
        assert rep.count == 0
        assert "empty" in rep.diagnostics

    def test_cap_truncation(self, table):
        inst = ProblemInstance(1.0, -math.sqrt(2.0), -1.0, k=1.05, varpi=0.0)
        full = find_solutions(inst, table, 2000.0, 0.5)
        capped = find_solutions(inst, table, 2000.0, 0.5, cap=3)
        assert full.count > 3
        assert capped.count == full.count
        assert len(capped.records) == 3 and capped.truncated

    def test_threshold_monotonicity(self, table):
        inst = ProblemInstance(1.0, -math.sqrt(2.0), -1.0, k=1.05, varpi=0.3)
        counts = [find_solutions(inst, table, 1500.0, thr).count
                  for thr in (0.01, 0.05, 0.2, 0.5, 1.0)]
        assert counts == sorted(counts)

    def test_residual_reevaluation_50_digits(self, table):
        inst = ProblemInstance(1.0, -math.sqrt(2.0), -1.0, k=1.05, varpi=0.0)
        rep = find_solutions(inst, table, 2000.0, 0.5)
        ctx = decimal.Context(prec=50)
        lam2 = decimal.Decimal(inst.lambda2)
        for r in rep.records[:20]:
            p3k = ctx.power(decimal.Decimal(r.p3),
                            decimal.Decimal(inst.k))
            exact = (decimal.Decimal(r.p1) + lam2 * decimal.Decimal(r.p2) ** 2
                     - p3k)
            assert abs(float(exact) - r.residual) < 1e-9

    def test_negated_instance_symmetry(self, table):
        inst = ProblemInstance(1.3, -math.sqrt(2.0), -0.7, k=1.08, varpi=0.4)
        neg = ProblemInstance(-1.3, math.sqrt(2.0), 0.7, k=1.08, varpi=-0.4)
        a = find_solutions(inst, table, 1200.0, 0.3)
        b = find_solutions(neg, table, 1200.0, 0.3)
        assert triples(a) == triples(b)

    def test_dyadic_window(self, exact_inst, table):
        # 17 + 2*4 = 25: in the dyadic convention all of p1, p2^2, p3^2
        # must lie in [X, 2X]; at X=20 only p1=17... p2^2=4 < 20 excludes it
        rep = find_solutions(exact_inst, table, 20.0, 0.0, window="dyadic")
        assert (17, 2, 5) not in triples(rep)

    def test_threshold_negative_rejected(self, exact_inst, table):
        with pytest.raises(ValidationError):
            find_solutions(exact_inst, table, 40.0, -0.1)


class TestBruteForce:
    def test_matches_fast_on_battery(self, table):
        rng = random.Random(8712)
        for _ in range(12):
            lam = [rng.choice([-1, 1]) * rng.uniform(0.4, 3.0)
                   for _ in range(3)]
            if all(l > 0 for l in lam) or all(l < 0 for l in lam):
                lam[1] = -lam[1]
            inst = ProblemInstance(lam[0], lam[1], lam[2],
                                   k=rng.uniform(1.0, 1.3),
                                   varpi=rng.uniform(-2, 2))
            X = rng.uniform(150.0, 2000.0)
            thr = rng.uniform(0.0, 0.6)
            fast = find_solutions(inst, table, X, thr)
            brute = brute_force_solutions(inst, table, X, thr)
            assert triples(fast) == triples(brute)

    def test_guard(self, exact_inst, table):
        with pytest.raises(ValidationError):
            brute_force_solutions(exact_inst, table, 10**5, 0.1)


class TestThreshold:
    def test_k1_formal_value(self):
        inst = ProblemInstance(1.0, -1.0, 1.0, k=1.0, eps=0.0)
        assert admissible_threshold(inst, 10**6) == pytest.approx(
            10 ** (-1.0 / 3.0), rel=1e-12)

    def test_boundary_k(self):
        inst = ProblemInstance(1.0, -1.0, 1.0, k=33.0 / 29.0, eps=0.0)
        assert admissible_threshold(inst, 10**6) == pytest.approx(1.0, rel=1e-9)

    def test_monotone_in_eps(self):
        vals = [admissible_threshold(
            ProblemInstance(1.0, -1.0, 1.0, k=1.05, eps=e), 10**5)
            for e in (0.0, 0.01, 0.05, 0.2)]
        assert vals == sorted(vals)

    def test_per_record_flag(self, table):
        inst = ProblemInstance(1.0, -math.sqrt(2.0), -1.0, k=1.05, varpi=0.0)
        rep = find_solutions(inst, table, 2000.0, 0.5)
        for r in rep.records:
            want = abs(r.residual) <= max(r.p1, r.p2, r.p3) ** (
                -(33 - 29 * 1.05) / (72 * 1.05) + inst.eps)
            assert r.within_admissible_width == want


def test_weighted_sum_consistency(table):
    inst = ProblemInstance(1.0, -math.sqrt(2.0), -1.0, k=1.05, varpi=0.0)
    eta = 0.5
    total = weighted_solution_sum(inst, table, 500.0, eta)
    rep = find_solutions(inst, table, 500.0, eta)
    manual = sum(math.log(r.p1) * math.log(r.p2) * math.log(r.p3)
                 * (eta - abs(r.residual)) for r in rep.records)
    assert total == pytest.approx(manual, rel=1e-12)


def test_count_bound_report(table):
    inst = ProblemInstance(1.0, -math.sqrt(2.0), -1.0, k=1.05, varpi=0.0)
    out = count_bound_report(inst, table, 500.0, 0.5)
    assert out["count"] > 0
    assert out["weighted_sum"] > 0 and out["majorant"] > 0


def test_residual_helper(table):
    inst = ProblemInstance(1.0, 2.0, -1.0, k=2.0, varpi=0.0)
    assert residual(inst, 17, 2, 5) == 0.0
    assert residual(inst, 17, 2, 7) == pytest.approx(17 + 8 - 49)
