import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swapparams.amm import PoolState, exogenous_price, sell_target, spot_price, swap_output

reserves = st.floats(1.0, 1e9)
fees = st.sampled_from([0.0, 0.0005, 0.003, 0.01, 0.3])


def invariant_output(pool, w):
    """Target out from the fee-adjusted constant-product invariant, solved directly."""
    k = pool.reserve_native * pool.reserve_target
    return pool.reserve_target - k / (pool.reserve_native + w * (1 - pool.fee))


class TestPoolState:
    @pytest.mark.parametrize("args", [(0, 1), (1, 0), (-1, 1), (1, 1, 1.0), (1, 1, -0.1)])
    def test_rejects_invalid(self, args):
        with pytest.raises(ValueError):
            PoolState(*args)

    @pytest.mark.parametrize("rn, rt, fee, expected", [
        (1000, 1000, 0.0, 1.0),
        (2000, 1000, 0.003, 2.0),
        (1e6, 5e5, 0.0, 2.0),
    ])
    def test_spot_price(self, rn, rt, fee, expected):
        assert spot_price(PoolState(rn, rt, fee)) == expected

    def test_from_price(self):
        pool = PoolState.from_price(2.0, 8e6, 0.003)
        assert spot_price(pool) == pytest.approx(2.0, rel=1e-15)
        assert pool.product == pytest.approx(8e6, rel=1e-15)


class TestSwap:
    def test_no_fee_example(self):
        delta, after = swap_output(PoolState(1000, 1000), 100)
        assert delta == pytest.approx(invariant_output(PoolState(1000, 1000), 100), rel=1e-14)
        assert delta == pytest.approx(90.909090909090909, rel=1e-14)
        assert after.reserve_native == 1100
        assert after.reserve_target == pytest.approx(909.09090909090909, rel=1e-14)
        assert after.product == pytest.approx(1e6, rel=1e-12)

    def test_zero_input(self):
        pool = PoolState(1000, 1000)
        assert swap_output(pool, 0) == (0.0, pool)

    def test_fee_example(self):
        pool = PoolState(1000, 1000, 0.003)
        delta, after = swap_output(pool, 100)
        assert delta == pytest.approx(1000 * 99.7 / 1099.7, rel=1e-14)
        assert delta == pytest.approx(invariant_output(pool, 100), rel=1e-12)
        # the fee stays in the pool
        assert after.reserve_native == 1100

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            swap_output(PoolState(1000, 1000), -1)

    def test_round_trip_loses_fees(self):
        pool = PoolState(5000, 3000, 0.003)
        got, mid = swap_output(pool, 250)
        back, _ = sell_target(mid, got)
        assert back < 250


class TestExogenousPrice:
    def test_examples(self):
        assert exogenous_price(PoolState(1000, 1000), 100) == pytest.approx(1.1, rel=1e-14)
        pool = PoolState(1000, 1000, 0.003)
        delta, _ = swap_output(pool, 100)
        assert exogenous_price(pool, 100) == pytest.approx(100 / delta, rel=1e-14)
        assert exogenous_price(pool, 100) == pytest.approx(1.1030090270812437, rel=1e-14)

    def test_small_trade_limit(self):
        assert exogenous_price(PoolState(1000, 1000), 1e-9) == pytest.approx(1.0, rel=1e-11)

    @pytest.mark.parametrize("w", [0.0, -5.0])
    def test_rejects_non_positive(self, w):
        with pytest.raises(ValueError):
            exogenous_price(PoolState(1000, 1000), w)


@settings(max_examples=200, deadline=None)
@given(rn=reserves, rt=reserves, fee=fees, frac=st.floats(1e-6, 1e3), scale=st.floats(1.001, 1e3))
def test_price_impact_strictly_increasing(rn, rt, fee, frac, scale):
    # sizes relative to depth keep the impact above double-precision resolution
    pool = PoolState(rn, rt, fee)
    w1 = frac * rn
    assert exogenous_price(pool, w1) < exogenous_price(pool, w1 * scale)


@settings(max_examples=200, deadline=None)
@given(rn=reserves, rt=reserves, fee=fees, w=st.floats(1e-3, 1e9))
def test_price_above_marginal(rn, rt, fee, w):
    pool = PoolState(rn, rt, fee)
    assert exogenous_price(pool, w) > spot_price(pool) / (1 - fee)


@settings(max_examples=200, deadline=None)
@given(rn=reserves, rt=reserves, w=st.floats(0.0, 1e9))
def test_product_conserved_without_fee(rn, rt, w):
    pool = PoolState(rn, rt)
    _, after = swap_output(pool, w)
    assert abs(after.product - pool.product) / pool.product <= 1e-9


@settings(max_examples=100, deadline=None)
@given(rn=reserves, rt=reserves, fee=fees, w=st.floats(0.0, 1e9))
def test_swap_is_pure(rn, rt, fee, w):
    pool = PoolState(rn, rt, fee)
    assert swap_output(pool, w) == swap_output(pool, w)
    assert pool == PoolState(rn, rt, fee)
