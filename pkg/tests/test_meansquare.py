import math

import numpy as np
import pytest

from primearcs.errors import ValidationError
from primearcs.expsums import WindowSpec
from primearcs.meansquare import (MeanSquareQuery,
                                  double_integral_bound_check, l2_diff,
                                  selberg_J, selberg_J_relative,
                                  theta_psi_discrepancy)
from primearcs.primes import is_prime


def riemann_oracle(table, X, shift, k, step, relative=False, use_psi=False):
    """Brute-force grid integration of the same integrand."""
    xs = np.arange(X, 2 * X, step) + step / 2
    rt = 1.0 / k
    if use_psi:
        def fn(y):
            return table.theta_many(y) + table.psi_minus_theta_many(y)
    else:
        fn = table.theta_many
    upper = xs * (1 + shift) if relative else xs + shift
    vals = (fn(upper ** rt) - fn(xs ** rt) - (upper ** rt - xs ** rt)) ** 2
    return float(vals.sum() * step)


class TestSelbergJ:
    def test_zero_increment(self, table):
        assert selberg_J(table, MeanSquareQuery(X=100, k=1, h=0)).value == 0.0

    def test_negative_increment_rejected(self, table):
        with pytest.raises(ValidationError):
            selberg_J(table, MeanSquareQuery(X=100, k=1, h=-1))

    @pytest.mark.parametrize("X,h,k,step", [
        (100, 10, 1.0, 1e-3),
        (10**4, 200, 1.0, 1e-2),
        (10**4, 500, 2.0, 1e-2),
        (2000, 37.5, 1.3, 1e-2),
    ])
    def test_grid_oracle(self, table, X, h, k, step):
        rep = selberg_J(table, MeanSquareQuery(X=float(X), k=k, h=float(h)))
        oracle = riemann_oracle(table, X, h, k, step)
        assert rep.value == pytest.approx(oracle, rel=1e-3)
        assert rep.method == "piecewise-exact"

    def test_psi_variant_oracle(self, table):
        q = MeanSquareQuery(X=500, k=1.0, h=25, use_psi=True)
        rep = selberg_J(table, q)
        oracle = riemann_oracle(table, 500, 25, 1.0, 1e-3, use_psi=True)
        assert rep.value == pytest.approx(oracle, rel=1e-3)

    def test_additivity_over_ranges(self, table):
        q = MeanSquareQuery(X=1000, k=1.0, h=40)
        full = selberg_J(table, q).value
        left = selberg_J(table, q, x_range=(1000.0, 1500.0)).value
        right = selberg_J(table, q, x_range=(1500.0, 2000.0)).value
        assert left + right == pytest.approx(full, rel=1e-12)

    def test_comparator_branches(self, table):
        uncond = selberg_J(table, MeanSquareQuery(X=10**4, k=1.0, h=500.0))
        rh = selberg_J(table, MeanSquareQuery(X=10**4, k=1.0, h=500.0,
                                              rh_mode=True))
        assert uncond.value == rh.value
        assert rh.comparator == pytest.approx(
            500 * 10**4 * math.log(2 * 10**4 / 500) ** 2)
        decay = math.exp(-(math.log(10**4) / math.log(math.log(10**4))) ** (1 / 3))
        assert uncond.comparator == pytest.approx(500 ** 2 * 10**4 * decay)
        assert rh.ratio == rh.value / rh.comparator

    def test_out_of_range_flag(self, table):
        # RH branch requires h >= X^(1-1/k); for k=2, X=1e4 that is 100
        rep = selberg_J(table, MeanSquareQuery(X=10**4, k=2.0, h=5.0,
                                               rh_mode=True))
        assert rep.note == "comparator-out-of-range"
        rep2 = selberg_J(table, MeanSquareQuery(X=10**4, k=2.0, h=500.0,
                                                rh_mode=True))
        assert rep2.note == ""

    def test_monitor_ratio_finite(self, table):
        rep = selberg_J(table, MeanSquareQuery(X=10**4, k=1.0,
                                               h=10**4 ** 0.6, rh_mode=True))
        assert 0 < rep.ratio < math.inf


class TestDiscrepancy:
    def test_zero(self, table):
        assert theta_psi_discrepancy(
            table, MeanSquareQuery(X=100, k=1, h=0)).value == 0.0

    def test_grid_oracle(self, table):
        q = MeanSquareQuery(X=100, k=1.0, h=20.0)
        rep = theta_psi_discrepancy(table, q)
        xs = np.arange(100, 200, 1e-3) + 5e-4
        pm = table.psi_minus_theta_many
        oracle = float(((pm(xs + 20) - pm(xs)) ** 2).sum() * 1e-3)
        assert rep.value == pytest.approx(oracle, rel=1e-3)
        assert rep.comparator == pytest.approx(20.0 * 100.0)

    def test_relative_form(self, table):
        q = MeanSquareQuery(X=400, k=1.0, rel_delta=0.05)
        rep = theta_psi_discrepancy(table, q)
        xs = np.arange(400, 800, 1e-3) + 5e-4
        pm = table.psi_minus_theta_many
        oracle = float(((pm(xs * 1.05) - pm(xs)) ** 2).sum() * 1e-3)
        assert rep.value == pytest.approx(oracle, rel=1e-3)
        assert rep.comparator == pytest.approx(0.05 * 400.0 ** 2)

    def test_square_split_inequality(self, table):
        # psi-version <= 2 theta-version + 2 discrepancy, any query
        for X, h, k in ((100, 10, 1.0), (3000, 120, 1.0), (10**4, 300, 2.0)):
            q_th = MeanSquareQuery(X=X, k=k, h=h)
            q_ps = MeanSquareQuery(X=X, k=k, h=h, use_psi=True)
            j_psi = selberg_J(table, q_ps).value
            j_th = selberg_J(table, q_th).value
            disc = theta_psi_discrepancy(table, q_th).value
            assert j_psi <= 2 * j_th + 2 * disc + 1e-9


class TestRelative:
    def test_zero(self, table):
        q = MeanSquareQuery(X=100, k=1, rel_delta=0.0)
        assert selberg_J_relative(table, q).value == 0.0

    def test_no_jump_closed_form(self, table):
        # X=4, k=1, delta=0.01: [4, 8.08] crosses primes 5 and 7, so use a
        # window that provably crosses nothing: x in [25.5, 26.5]-ish via
        # x_range is not exposed here, so pick X=4 with tiny delta where
        # theta terms cancel exactly on the gap (24, 29) scaled down.
        # Simplest no-jump case: delta small enough that (x, x(1+delta))
        # never straddles a prime for x in [X, 2X]: X=24 fails; use the
        # explicit gap [90, 96]*... fall back to direct assertion that the
        # integral equals the drift-only closed form when no breakpoints.
        q = MeanSquareQuery(X=25.2, k=1.0, rel_delta=0.002)
        rep = selberg_J_relative(table, q)
        # crossings of x and 1.002x over [25.2, 50.4]: primes in between
        # contribute; verify against the dense oracle instead
        oracle = riemann_oracle(table, 25.2, 0.002, 1.0, 1e-5, relative=True,
                                use_psi=False)
        assert rep.value == pytest.approx(oracle, rel=2e-3)

    def test_grid_oracle(self, table):
        q = MeanSquareQuery(X=10**4, k=2.0, rel_delta=0.05, use_psi=True)
        rep = selberg_J_relative(table, q)
        oracle = riemann_oracle(table, 10**4, 0.05, 2.0, 1e-2, relative=True,
                                use_psi=True)
        assert rep.value == pytest.approx(oracle, rel=1e-3)

    def test_substituted_form_same_order(self, table):
        # the k=1 substituted form agrees up to a k-dependent constant;
        # both are reported, their ratio must stay in a generous window
        q = MeanSquareQuery(X=10**4, k=2.0, rel_delta=0.05, use_psi=True)
        rep = selberg_J_relative(table, q)
        assert rep.substituted is not None and rep.substituted > 0
        assert 0.05 < rep.value / rep.substituted < 20.0


class TestL2Diff:
    def test_parseval_exact(self, table):
        for X in (10, 100, 1000):
            w = WindowSpec(X=float(X), k=1.0, delta=0.1)
            rep = l2_diff(table, w, 0.5, method="pairwise-exact")
            ns = np.arange(X, 2 * X + 1)
            ell = np.array([math.log(n) if is_prime(int(n)) else 0.0
                            for n in ns])
            exact = float(((ell - 1.0) ** 2).sum())
            assert rep.value == pytest.approx(exact, rel=1e-9)

    def test_parseval_known_value(self, table):
        w = WindowSpec(X=10.0, k=1.0, delta=0.1)
        rep = l2_diff(table, w, 0.5)
        assert rep.value == pytest.approx(18.544691793, rel=1e-9)

    def test_small_Y_bound(self, table):
        from primearcs.expsums import s_minus_u_l1_bound
        w = WindowSpec(X=200.0, k=1.0, delta=0.1)
        mass = s_minus_u_l1_bound(table, w)
        for Y in (1e-5, 1e-4, 1e-3):
            rep = l2_diff(table, w, Y, method="pairwise-exact")
            assert 0 <= rep.value <= 2 * Y * mass ** 2 + 1e-12

    def test_cross_method(self, table):
        w = WindowSpec(X=1000.0, k=1.05, delta=0.1)
        a = l2_diff(table, w, 0.01, method="pairwise-exact").value
        b = l2_diff(table, w, 0.01, method="grid").value
        assert b == pytest.approx(a, rel=1e-4)

    def test_pairwise_cap_refused(self, table):
        w = WindowSpec(X=10**5, k=1.05, delta=0.1)
        with pytest.raises(ValidationError):
            l2_diff(table, w, 0.01, method="pairwise-exact")

    def test_auto_dispatch(self, table):
        w = WindowSpec(X=100.0, k=1.0, delta=0.1)
        assert l2_diff(table, w, 0.25).method == "pairwise-exact"
        w_big = WindowSpec(X=10**5, k=1.05, delta=0.1)
        assert l2_diff(table, w_big, 1e-4).method == "grid"

    def test_comparator_positive(self, table):
        w = WindowSpec(X=1000.0, k=1.05, delta=0.1)
        rep = l2_diff(table, w, 0.01)
        assert rep.comparator > 0 and rep.ratio == rep.value / rep.comparator


def test_query_validation():
    with pytest.raises(ValidationError):
        MeanSquareQuery(X=100, k=1.0)
    with pytest.raises(ValidationError):
        MeanSquareQuery(X=100, k=1.0, h=1.0, Y=0.2)
    with pytest.raises(ValidationError):
        MeanSquareQuery(X=100, k=1.0, Y=0.7)
    q = MeanSquareQuery(X=100, k=1.0, h=2.0)
    assert q.C_density == pytest.approx(2.4)


def test_double_integral_majorant(table):
    lhs, rhs = double_integral_bound_check(
        table, MeanSquareQuery(X=50.0, k=1.0, h=5.0))
    assert lhs <= rhs * (1 + 0.05)  # quadrature slack on the rhs grid
