from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qinterp.errors import EnumerationRefusedError, InvalidFractionError
from qinterp.filters import filter_difference_area, filter_from_plan, ideal_filter
from qinterp.planner import (HardwareGrid, InterpolationPlan, as_fraction, bch_zeroth_order,
                             brute_force_best_plan, bresenham_trace, half_sample_infidelity,
                             naive_plan, optimal_plan, plan_fidelity,
                             relative_trapezium_error, supersampled_propagator,
                             supersampled_sweep, trapezium_error, _manifold_blocks)
from qinterp.spin import SpinCoupling, block_propagators, signal_at_angle
from qinterp.su2 import power, rotation_matrix, trace_fidelity

DT = np.pi / 20
C01 = SpinCoupling.from_tilt(1.0, 0.1)


def peak_grid(dtheta=DT, k=10, delta0=0.0):
    """Grid with omega_L = 1 whose U0 sits ``delta0`` past the peak."""
    return HardwareGrid.from_angle(dtheta, k, 1.0, np.pi / 2 - k * dtheta + delta0)


def word(s):
    return tuple(int(ch) for ch in s)


class TestPlans:
    def test_endpoints(self):
        assert optimal_plan(0, 5).word == (0,) * 5
        assert optimal_plan(1, 5).word == (1,) * 5

    def test_half(self):
        assert optimal_plan("1/2", 2).word == (0, 1)

    def test_three_eighths(self):
        assert optimal_plan(Fraction(3, 8), 8).to_string() == "01001010"

    def test_cycles_period(self):
        assert optimal_plan("1/4", 12).to_string() == "0010" * 3

    def test_counts(self):
        p = optimal_plan("5/12", 12)
        assert (p.p, p.q, p.n_blocks, p.fraction) == (7, 5, 12, Fraction(5, 12))
        assert p.header() == {"p": 7, "q": 5, "N": 12, "word": p.to_string()}

    @pytest.mark.parametrize("bad", [("1/3", 4), ("3/2", 2), ("-1/2", 2), ("abc", 2), ("1/2", 0)])
    def test_invalid(self, bad):
        with pytest.raises(InvalidFractionError):
            optimal_plan(*bad)

    def test_naive(self):
        assert naive_plan("1/2", 4).word == (0, 1, 0, 1)
        assert naive_plan("1/4", 4).word == (0, 0, 0, 1)
        assert naive_plan("1/2", 4, period=4).word == (0, 0, 1, 1)
        with pytest.raises(InvalidFractionError):
            naive_plan("1/2", 4, period=3)

    def test_string_round_trip(self):
        p = optimal_plan("3/7", 14)
        assert InterpolationPlan.from_string(str(p)) == p
        with pytest.raises(ValueError):
            InterpolationPlan.from_string("0120")

    def test_float_fraction(self):
        assert as_fraction(0.375) == Fraction(3, 8)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 40).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
    def test_accumulator_invariant(self, jn):
        j, n = jn
        f = Fraction(j, n)
        symbols, acc = bresenham_trace(f)
        assert all(abs(m) <= Fraction(1, 2) for m in acc)
        assert acc[-1] == 0
        assert len(symbols) == f.denominator
        plan = optimal_plan(f, n)
        assert plan.fraction == f
        assert plan.n_blocks == n

    def test_tie_goes_to_u0(self):
        symbols, acc = bresenham_trace(Fraction(1, 2))
        assert symbols == [0, 1]
        assert acc[0] == Fraction(1, 2)


class TestTrapeziumError:
    grid = HardwareGrid(2e-9, 25)

    def test_zero_for_grid_points(self):
        assert trapezium_error(optimal_plan(0, 8), self.grid) == 0.0
        assert trapezium_error(optimal_plan(1, 8), self.grid) == 0.0

    def test_half_sample(self):
        p = optimal_plan("1/2", 2)
        assert trapezium_error(p, self.grid) == pytest.approx(4 * 2e-9)
        tau_star = self.grid.tau_k + 1e-9
        assert relative_trapezium_error(p, self.grid) == pytest.approx(2e-9 / (2 * tau_star))

    @pytest.mark.parametrize("f,n", [("1/2", 2), ("3/8", 8), ("5/12", 12), ("1/3", 9)])
    def test_equals_half_filter_difference_area(self, f, n):
        p = optimal_plan(f, n)
        area = filter_difference_area(filter_from_plan(p, self.grid), ideal_filter(p, self.grid))
        assert trapezium_error(p, self.grid) == pytest.approx(0.5 * area, rel=1e-9)

    def test_uniformity_n16(self):
        errors = [trapezium_error(optimal_plan(Fraction(j, 16), 16), self.grid) for j in range(17)]
        half = trapezium_error(optimal_plan("1/2", 16), self.grid)
        assert max(errors) <= half + 1e-12 * half

    @pytest.mark.parametrize("k", range(1, 6))
    def test_dyadic_bound(self, k):
        n = 2 ** k
        bound = 2 ** (k - 1) * 4 * self.grid.delta_tau
        for j in range(n + 1):
            assert trapezium_error(optimal_plan(Fraction(j, n), n), self.grid) <= bound * (1 + 1e-12)

    def test_naive_worse_at_half_n16(self):
        opt = trapezium_error(optimal_plan("1/2", 16), self.grid)
        assert trapezium_error(naive_plan("1/2", 16, period=16), self.grid) > opt

    @pytest.mark.parametrize("n", [4, 6, 8, 9, 10])
    def test_optimal_is_minimal_over_permutations(self, n):
        from itertools import combinations
        for j in range(n + 1):
            best = min(
                trapezium_error(InterpolationPlan(tuple(1 if i in ones else 0 for i in range(n))), self.grid)
                for ones in combinations(range(n), j))
            got = trapezium_error(optimal_plan(Fraction(j, n), n), self.grid)
            assert got <= best * (1 + 1e-12) + 1e-24


class TestPropagator:
    def test_single_symbol_power(self):
        u0, u1 = block_propagators(C01, 2.9)
        r = supersampled_propagator(optimal_plan(0, 6), u0, u1)
        assert trace_fidelity(r, power(u0, 6)) == pytest.approx(1.0, abs=1e-14)

    def test_order_is_left_to_right(self):
        u0, u1 = block_propagators(C01, 2.9)
        r = supersampled_propagator(InterpolationPlan((0, 1, 1)), u0, u1)
        dense = u0.to_matrix() @ u1.to_matrix() @ u1.to_matrix()
        assert np.allclose(r.to_matrix(), dense, atol=1e-12)

    def test_fraction_zero_fidelity_one(self):
        assert plan_fidelity(optimal_plan(0, 7), peak_grid(), C01) == pytest.approx(1.0, abs=1e-14)

    def test_half_sample_second_order(self):
        dts = np.geomspace(np.pi / 200, np.pi / 20, 8)
        inf = [half_sample_infidelity(C01, d) for d in dts]
        slope = np.polyfit(np.log(dts), np.log(inf), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.15)

    def test_half_sample_matches_dense_target(self):
        d = np.pi / 40
        n1, z = C01.tilted_axis, np.array([0.0, 0.0, 1.0])
        eta = C01.eta

        def m0(theta):
            return rotation_matrix(theta / 2, z) @ rotation_matrix(eta * theta, n1) @ rotation_matrix(theta / 2, z)

        interp = m0(np.pi - d) @ m0(np.pi + d)
        target = m0(np.pi) @ m0(np.pi)
        fid = abs(np.trace(interp @ target.conj().T)) / 2
        grid = HardwareGrid.from_angle(d, 1, 1.0, np.pi / 2 - 1.5 * d)
        ours = plan_fidelity(InterpolationPlan((0, 1)), grid, C01)
        # plan_fidelity takes the worse manifold
        assert ours <= fid + 1e-12
        assert 1 - fid == pytest.approx(1 - ours, rel=0.5)

    def test_offset_robustness(self):
        plan = InterpolationPlan((0, 1))
        for d in (np.pi / 20, np.pi / 40, np.pi / 80):
            base = np.pi / 2 - 1.5 * d
            inf = [1 - plan_fidelity(plan, HardwareGrid.from_angle(d, 1, 1.0, base + x), C01)
                   for x in np.linspace(-2 * d, 2 * d, 9)]
            assert max(inf) < 0.05 * d ** 2
            assert max(inf) - min(inf) < 0.01 * d ** 2

    def test_bch_misses_interpolation(self):
        c = SpinCoupling.from_tilt(1.0, 0.3)
        d = np.pi / 20
        grid = HardwareGrid.from_angle(d, 1, 1.0, np.pi / 2 - 1.5 * d)
        for n in (2, 4, 8, 16):
            plan = optimal_plan("1/2", n)
            a0, _ = _manifold_blocks(c, grid, 0)
            b0, _ = _manifold_blocks(c, grid, 1)
            t0, _ = _manifold_blocks(c, grid, plan.fraction)
            exact = supersampled_propagator(plan, a0, b0)
            bch_err = 1 - trace_fidelity(exact, bch_zeroth_order(c, d, n))
            interp_err = 1 - trace_fidelity(exact, power(t0, n))
            assert bch_err > interp_err

    def test_bch_exact_without_step(self):
        u0, _ = block_propagators(C01, np.pi, eta=1.0)
        assert trace_fidelity(bch_zeroth_order(C01, 1e-12, 10), power(u0, 10)) == pytest.approx(1.0, abs=1e-12)


class TestFidelityRanking:
    @pytest.mark.parametrize("alpha", [0.05, 0.1, 0.2])
    @pytest.mark.parametrize("dtheta", [np.pi / 20, np.pi / 40])
    @pytest.mark.parametrize("n", [8, 16])
    def test_optimal_beats_naive(self, alpha, dtheta, n):
        c = SpinCoupling.from_tilt(1.0, alpha)
        grid = peak_grid(dtheta)
        for j in range(1, n):
            if n == 16 and j in (1, 15):
                continue  # see test_single_odd_block_metric_disagreement
            f = Fraction(j, n)
            opt = plan_fidelity(optimal_plan(f, n), grid, c)
            for period in (None, n):
                assert opt >= plan_fidelity(naive_plan(f, n, period), grid, c) - 1e-12

    def test_single_odd_block_metric_disagreement(self):
        # with a single U1 among 16 blocks the filter metric prefers it in the
        # middle while the unitary fidelity prefers it at the end
        grid = peak_grid()
        opt, naive = optimal_plan("1/16", 16), naive_plan("1/16", 16)
        tgrid = HardwareGrid(1e-9, 10)
        assert trapezium_error(opt, tgrid) < trapezium_error(naive, tgrid)
        assert plan_fidelity(opt, grid, SpinCoupling.from_tilt(1.0, 0.2)) < \
            plan_fidelity(naive, grid, SpinCoupling.from_tilt(1.0, 0.2))


class TestBruteForce:
    def test_two_blocks_tie(self):
        best, table = brute_force_best_plan("1/2", 2, peak_grid(), C01)
        assert set(table) == {"01", "10"}
        assert {b.to_string() for b in best} == {"01", "10"}

    def test_endpoint_single_word(self):
        best, table = brute_force_best_plan(1, 6, peak_grid(), C01)
        assert list(table) == ["111111"]
        assert best[0].word == (1,) * 6

    def test_ninths(self):
        grid = peak_grid()
        for j in range(10):
            best, _ = brute_force_best_plan(Fraction(j, 9), 9, grid, C01)
            assert optimal_plan(Fraction(j, 9), 9) in best

    def test_table_size(self):
        _, table = brute_force_best_plan("5/12", 12, peak_grid(), C01)
        assert len(table) == 792

    def test_refuses_large(self):
        with pytest.raises(EnumerationRefusedError):
            brute_force_best_plan("1/2", 14, peak_grid(), C01)

    def test_scores_match_plan_fidelity(self):
        grid = peak_grid()
        _, table = brute_force_best_plan("3/8", 8, grid, C01, n_offsets=1)
        p = optimal_plan("3/8", 8)
        assert table[p.to_string()] == pytest.approx(1 - plan_fidelity(p, grid, C01), abs=1e-12)


class TestSweep:
    def test_supersampled_sweep_grid(self):
        c = SpinCoupling.from_tilt(2 * np.pi * 1e6, 0.1)
        taus, sig, words = supersampled_sweep(c, 240e-9, 260e-9, 20e-9, 8)
        assert np.allclose(np.diff(taus), 2.5e-9)
        assert len(taus) == len(sig) == len(words)
        # grid points reproduce the direct uniform signal
        i = int(np.argmin(np.abs(taus - 240e-9)))
        assert words[i] == "0" * 8
        assert sig[i] == pytest.approx(signal_at_angle(c, 2 * 240e-9 * c.omega_L, 8), abs=1e-12)

    def test_sweep_needs_ordered_window(self):
        with pytest.raises(ValueError):
            supersampled_sweep(C01, 2.0, 1.0, 0.1, 4)
