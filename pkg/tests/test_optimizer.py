import math
import warnings

import numpy as np
import pytest

from conftest import ref1_model, zero_noise_model
from swapparams.mev import MevParams
from swapparams.optimizer import (
    McConfig,
    NoInteriorOptimum,
    PlanConfig,
    SearchConfig,
    TradePlan,
    WGridConfig,
    ZeroFillProbability,
    _evaluate,
    golden_max,
    objective,
    objective_estimate,
    plan_multi_pool,
    plan_trades,
    solve_a,
    solve_wstar,
    value_function,
)
from swapparams.stochastic import draw_samples

MC = McConfig(n_samples=20_000, seed=42)
SMALL = McConfig(n_samples=4_000, seed=7)
COARSE = WGridConfig(w_lo=100.0, w_hi=1e5, w_points=13, refine_iters=6)
FAST = SearchConfig(a_points=32, refine_iters=12)


class TestObjective:
    def test_zero_noise_closed_form(self):
        value = objective(0.02, 1e4, zero_noise_model(), MC)
        assert value == pytest.approx(1e4 / 1.01 - 1.0, rel=1e-12)

    @pytest.mark.parametrize("a", [0.0101, 0.02, 0.3])
    def test_zero_gas_flat(self, a):
        assert objective(a, 1e4, zero_noise_model(gas=0.0), MC) == pytest.approx(1e4 / 1.01, rel=1e-12)

    def test_zero_fill(self):
        with pytest.raises(ZeroFillProbability):
            objective(0.005, 1e4, zero_noise_model(), MC)

    def test_value_consistent_with_parts(self, ref1):
        value, se, F, ratio = objective_estimate(0.02, 3e3, ref1, MC)
        assert value == pytest.approx(3e3 * ratio.mean - ref1.gas / F.mean, rel=1e-12)
        assert se > 0

    def test_upper_bound_without_costs(self):
        model = ref1_model(fee=0.0, gas=0.0, depth_vol=0.0, enabled=False)
        for w in (1e2, 1e3, 1e4, 1e5):
            value, se, _, _ = objective_estimate(0.5, w, model, MC)
            assert value < w


class TestGoldenMax:
    def test_parabola(self):
        x, fx = golden_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, 60)
        assert x == pytest.approx(0.3, abs=1e-9)
        assert fx == pytest.approx(0.0, abs=1e-15)


class TestSolveA:
    def test_zero_noise_tie_goes_to_smallest(self):
        model = zero_noise_model()
        sol = solve_a(1e4, model, SearchConfig(), MC)
        grid = np.geomspace(1e-4, 0.5, 64)
        assert sol.a_star == grid[grid > 0.01][0]
        assert sol.value == pytest.approx(1e4 / 1.01 - 1.0, rel=1e-12)
        assert sol.expected_attempts == 1.0

    def test_mev_hugs_fill_threshold(self):
        model = ref1_model(gas=0.0, attacker_gas=0.0, fee=0.0, depth_vol=0.0)
        w = 1e4
        sol = solve_a(w, model, SearchConfig(), MC)
        samples = draw_samples(model, w, MC.n_samples, MC.seed)
        scan = []
        for a in np.geomspace(1e-3, 0.5, 400):
            try:
                value, se, F, _ = _evaluate(a, samples)
            except ZeroFillProbability:
                continue
            except Exception:
                continue
            scan.append((a, value, se, F.mean))
            assert value <= sol.value + 3 * math.hypot(se, sol.value_se)
        # every fill is pinned at p + a, so once fills are common more slack only costs
        assert sol.f_at_a.mean < 0.1
        tail = [v for a, v, _, F in scan if F > 0.5]
        assert all(b < a for a, b in zip(tail, tail[1:]))

    def test_local_optimality(self, ref1):
        w = 3e3
        sol = solve_a(w, ref1, SearchConfig(), MC)
        for d in (0.95, 1.05):
            value, se, _, _ = objective_estimate(sol.a_star * d, w, ref1, MC)
            assert value <= sol.value + 3 * math.hypot(se, sol.value_se)

    def test_no_grid_point_beats_optimum(self, ref1):
        w = 1e4
        sol = solve_a(w, ref1, SearchConfig(), MC)
        samples = draw_samples(ref1, w, MC.n_samples, MC.seed)
        for a in np.geomspace(1e-4, 0.5, 64):
            try:
                value, se, _, _ = _evaluate(a, samples)
            except Exception:
                continue
            assert value <= sol.value + 3 * math.hypot(se, sol.value_se)

    def test_whole_bracket_fails(self):
        with pytest.raises(ZeroFillProbability):
            solve_a(1e4, zero_noise_model(), SearchConfig(a_lo=1e-4, a_hi=5e-3), MC)

    def test_invalid_bracket(self, ref1):
        with pytest.raises(ValueError):
            solve_a(1e3, ref1, SearchConfig(a_lo=0.1, a_hi=0.01), MC)


class TestValueFunction:
    def test_singleton(self, ref1):
        (point,) = value_function([2e3], ref1, FAST, SMALL)
        assert point.solution == solve_a(2e3, ref1, FAST, SMALL)

    def test_rejects_unsorted(self, ref1):
        with pytest.raises(ValueError):
            value_function([2e3, 1e3], ref1, FAST, SMALL)

    def test_error_recorded_not_raised(self):
        points = value_function([1e4, 1e5], zero_noise_model(), SearchConfig(a_lo=1e-4, a_hi=0.05), SMALL)
        assert points[0].solution is not None
        assert points[1].solution is None and "fills" in points[1].error

    def test_price_impact_only_decreasing(self):
        model = zero_noise_model(gas=0.0)
        points = value_function(np.geomspace(1e2, 1e5, 10), model, FAST, SMALL)
        unit = [p.solution.per_unit for p in points]
        assert all(b < a for a, b in zip(unit, unit[1:]))

    def test_ref1_eventually_decreasing(self, ref1):
        points = value_function(np.geomspace(5e3, 1e5, 6), ref1, FAST, MC)
        unit = [p.solution.per_unit for p in points]
        assert all(b < a for a, b in zip(unit, unit[1:]))

    def test_independent_of_workers(self, ref1):
        grid = np.geomspace(1e2, 1e4, 4)
        one = value_function(grid, ref1, FAST, SMALL)
        three = value_function(grid, ref1, FAST, McConfig(SMALL.n_samples, SMALL.seed, workers=3))
        assert [p.solution.value for p in one] == [p.solution.value for p in three]


class TestSolveWStar:
    def test_ref1_interior_and_certified(self, ref1):
        res = solve_wstar(ref1, COARSE, FAST, MC)
        assert COARSE.w_lo < res.w_star < COARSE.w_hi
        assert res.certified
        assert res.local_maxima

    def test_zero_gas_lower_edge(self):
        with pytest.raises(NoInteriorOptimum) as info:
            solve_wstar(ref1_model(gas=0.0), COARSE, FAST, MC)
        assert info.value.edge == "lower"
        assert info.value.strictly_monotone

    def test_more_gas_larger_trades(self):
        grid = WGridConfig(w_lo=100.0, w_hi=1e6, w_points=17, refine_iters=6)
        base = solve_wstar(ref1_model(), grid, FAST, MC).w_star
        heavy = solve_wstar(ref1_model(gas=100.0), grid, FAST, MC).w_star
        assert heavy >= base

    def test_narrow_grid_rejected(self, ref1):
        with pytest.raises(ValueError):
            solve_wstar(ref1, WGridConfig(w_lo=100.0, w_hi=5000.0), FAST, SMALL)


class TestPlans:
    W_STAR = 1000.0

    def test_plan_rejects_zero_trades(self):
        with pytest.raises(ValueError):
            TradePlan(0, 1.0, 0.1, 0.0, "manual")

    def test_large_wealth_exact_multiple(self, ref1):
        plan = plan_trades(10 * self.W_STAR, ref1, PlanConfig(), COARSE, FAST, SMALL, w_star=self.W_STAR)
        assert plan.mode == "large-wealth"
        assert plan.n_trades == 10
        assert plan.per_trade_size == pytest.approx(self.W_STAR, rel=1e-12)

    def test_conservation(self, ref1):
        for W in (7_777.0, 12_345.0, 400.0):
            plan = plan_trades(W, ref1, PlanConfig(), COARSE, FAST, SMALL, w_star=self.W_STAR)
            assert plan.n_trades * plan.per_trade_size == pytest.approx(W, rel=1e-9)

    def test_half_wealth_iterative(self, ref1):
        W = self.W_STAR / 2
        plan = plan_trades(W, ref1, PlanConfig(), COARSE, FAST, SMALL, w_star=self.W_STAR)
        assert plan.mode == "iterative-search"
        one = solve_a(W, ref1, FAST, SMALL)
        two = solve_a(W / 2, ref1, FAST, SMALL)
        sigma = math.hypot(one.value_se, 2 * two.value_se)
        if plan.n_trades == 1:
            assert one.value >= 2 * two.value - 3 * sigma
        else:
            assert plan.n_trades >= 2
        assert dict(plan.candidates)[plan.n_trades] == max(v for _, v in plan.candidates)

    def test_tiny_wealth_single_trade(self, ref1):
        plan = plan_trades(20.0, ref1, PlanConfig(), COARSE, FAST, SMALL, w_star=self.W_STAR)
        assert plan.n_trades == 1

    def test_rejects_nonpositive_wealth(self, ref1):
        with pytest.raises(ValueError):
            plan_trades(0.0, ref1, w_star=self.W_STAR)


class TestMultiPool:
    def test_single_pool_matches_wstar(self, ref1):
        plan = plan_multi_pool(1e6, [ref1], COARSE, FAST, SMALL)
        res = solve_wstar(ref1, COARSE, FAST, SMALL)
        (entry,) = plan.entries
        assert entry.w_star == res.w_star and entry.a_star == res.solution.a_star

    def test_identical_pools(self, ref1):
        plan = plan_multi_pool(1e6, {"a": ref1, "b": ref1}, COARSE, FAST, SMALL)
        first, second = plan.entries
        assert first.w_star == second.w_star
        assert first.per_unit_value == second.per_unit_value

    def test_deeper_pool_preferred(self):
        shallow = ref1_model()
        deep = ref1_model(reserve_native=1e7, reserve_target=1e7)
        grid = WGridConfig(w_lo=100.0, w_hi=1e6, w_points=17, refine_iters=6)
        plan = plan_multi_pool(1e7, {"shallow": shallow, "deep": deep}, grid, FAST, MC)
        by_id = {e.pool_id: e for e in plan.entries}
        assert plan.entries[0].pool_id == "deep"
        assert by_id["deep"].w_star >= by_id["shallow"].w_star
        values = [e.per_unit_value for e in plan.entries]
        assert values == sorted(values, reverse=True)

    def test_failed_pool_skipped_with_warning(self, ref1):
        with pytest.warns(UserWarning, match="omitted"):
            plan = plan_multi_pool(1e6, {"ok": ref1, "flat": ref1_model(gas=0.0)}, COARSE, FAST, SMALL)
        assert [e.pool_id for e in plan.entries] == ["ok"]
        assert plan.skipped[0][0] == "flat"
