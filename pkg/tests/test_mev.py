import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mev_oracle import STEP, grid_frontrun, replay
from swapparams.amm import PoolState, exogenous_price, sell_target, swap_output
from swapparams.mev import (
    MevParams,
    attacker_profit,
    endogenous_fill,
    optimal_frontrun,
    pin_frontrun,
)


def replay_public(pool, w, b):
    """The three swaps through the public pool API."""
    got, p1 = swap_output(pool, b)
    delta, p2 = swap_output(p1, w)
    back, _ = sell_target(p2, got)
    return w / delta, back - b


class TestOptimalFrontrun:
    def test_closed_form_example(self):
        b = optimal_frontrun(PoolState(1000, 1000), 100, 1.2)
        assert b == pytest.approx((-2100 + math.sqrt(2100**2 + 4e5)) / 2, rel=1e-12)
        assert b == pytest.approx(46.5856, abs=1e-4)

    def test_grid_oracle_example(self):
        b = optimal_frontrun(PoolState(1000, 1000), 100, 1.2)
        assert abs(b - grid_frontrun(1000, 1000, 0.0, 100, 1.2)) <= STEP

    def test_vanishes_at_exogenous_price(self):
        pool = PoolState(1000, 1000)
        sizes = [optimal_frontrun(pool, 100, 1.1 + eps) for eps in (1e-2, 1e-4, 1e-6, 1e-9)]
        assert sizes == sorted(sizes, reverse=True)
        assert sizes[-1] < 1e-5

    @pytest.mark.slow
    def test_large_pool(self):
        pool = PoolState(1e6, 1e6)
        b = optimal_frontrun(pool, 1e4, 1.05)
        fill, _ = replay_public(pool, 1e4, b)
        assert fill == pytest.approx(1.05, rel=1e-9)
        assert abs(b - grid_frontrun(1e6, 1e6, 0.0, 1e4, 1.05, chunk=10_000_000, dtype=np.float64)) <= STEP

    @pytest.mark.parametrize("c", [1.1, 1.05])
    def test_rejects_without_room(self, c):
        with pytest.raises(ValueError):
            optimal_frontrun(PoolState(1000, 1000), 100, c)

    def test_pin_hits_cutoff_with_fee(self):
        pool = PoolState(800, 1200, 0.003)
        c = exogenous_price(pool, 50) * 1.03
        fill, _ = replay_public(pool, 50, pin_frontrun(pool, 50, c))
        assert abs(fill - c) <= 1e-9 * c

    def test_fee_can_make_smaller_frontrun_better(self):
        # a big cutoff would need a front-run so large its round-trip fees eat the gain
        pool = PoolState(1e6, 1e6, 0.003)
        c = 1.25
        b_pin = pin_frontrun(pool, 3162, c)
        b = optimal_frontrun(pool, 3162, c)
        assert b < b_pin
        assert attacker_profit(pool, 3162, b) > 0 > attacker_profit(pool, 3162, b_pin)
        bs = np.linspace(0, b_pin, 20001)
        assert attacker_profit(pool, 3162, b) >= float(replay(1e6, 1e6, 0.003, 3162, bs)[1].max()) - 1e-9


class TestEndogenousFill:
    pool = PoolState(1000, 1000)

    def test_reverts_below_exogenous_price(self):
        for gas in (0.0, 1e9):
            res = endogenous_fill(self.pool, 100, 1.05, MevParams(gas))
            assert not res.executed and res.avg_price is None and not res.attacked

    def test_unprofitable_attack(self):
        res = endogenous_fill(self.pool, 100, 1.2, MevParams(1e9))
        assert res.executed and not res.attacked
        assert res.avg_price == pytest.approx(1.1, rel=1e-14)

    def test_profitable_attack_pins_fill(self):
        res = endogenous_fill(self.pool, 100, 1.2, MevParams(0.0))
        assert res.executed and res.attacked
        assert res.avg_price == 1.2
        assert res.frontrun_size == pytest.approx(46.5856, abs=1e-4)
        _, profit = replay_public(self.pool, 100, res.frontrun_size)
        assert profit > 0

    def test_disabled(self):
        res = endogenous_fill(self.pool, 100, 1.2, MevParams(0.0, enabled=False))
        assert res.avg_price == pytest.approx(1.1) and not res.attacked

    @pytest.mark.parametrize("w, c", [(0, 1.2), (-1, 1.2), (100, 0), (100, -1)])
    def test_rejects_bad_input(self, w, c):
        with pytest.raises(ValueError):
            endogenous_fill(self.pool, w, c, MevParams())

    def test_negative_attacker_gas(self):
        with pytest.raises(ValueError):
            MevParams(-1.0)


pools = st.builds(
    PoolState,
    st.floats(10, 1e7), st.floats(10, 1e7), st.sampled_from([0.0, 0.0005, 0.003, 0.01, 0.05]),
)


@settings(max_examples=200, deadline=None)
@given(pool=pools, frac=st.floats(1e-4, 3.0), room=st.floats(-0.2, 1.0), gas=st.floats(0, 100))
def test_sandwich_bound_and_consistency(pool, frac, room, gas):
    w = frac * pool.reserve_native
    z = exogenous_price(pool, w)
    c = z * (1 + room)
    res = endogenous_fill(pool, w, c, MevParams(gas))
    if not res.executed:
        assert z >= c
        return
    assert z * (1 - 1e-12) <= res.avg_price <= c
    if res.attacked:
        fill, profit = replay_public(pool, w, res.frontrun_size)
        assert profit > 2 * gas
        assert fill == pytest.approx(res.avg_price, rel=1e-9)


@settings(max_examples=150, deadline=None)
@given(pool=pools, frac=st.floats(1e-3, 2.0), gas=st.floats(0, 10),
       rooms=st.lists(st.floats(1e-6, 1.0), min_size=2, max_size=12))
def test_fill_nondecreasing_in_cutoff(pool, frac, gas, rooms):
    w = frac * pool.reserve_native
    z = exogenous_price(pool, w)
    mev = MevParams(gas)
    prices = [endogenous_fill(pool, w, z * (1 + r), mev).avg_price for r in sorted(rooms)]
    assert all(b >= a * (1 - 1e-12) for a, b in zip(prices, prices[1:]))
