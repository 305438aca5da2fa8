"""
How big should each trade be?
=============================

Splitting wealth ``W`` into ``W/w`` trades of size ``w`` is worth
``W * V(w) / w``. Small trades waste gas, big ones pay price impact and
feed the bot, so the value per unit peaks somewhere in between.
"""
from swapparams.amm import PoolState
from swapparams.mev import MevParams
from swapparams.optimizer import (
    McConfig, NoInteriorOptimum, PlanConfig, SearchConfig, WGridConfig,
    plan_multi_pool, plan_trades, solve_wstar,
)
from swapparams.stochastic import MarketModel

model = MarketModel(PoolState(1e6, 1e6, 0.003), price_vol=0.002, depth_vol=0.001, gas=1.0,
                    mev=MevParams(attacker_gas=1.0))
mc = McConfig(20_000, 42)
grid = WGridConfig(w_lo=100.0, w_hi=1e5, w_points=13, refine_iters=8)
search = SearchConfig(a_points=32, refine_iters=12)

res = solve_wstar(model, grid, search, mc)
for p in res.curve:
    print(f"  w={p.w:>9.1f}  V/w={p.solution.per_unit:.6f}")
print(f"w* = {res.w_star:.1f}, a* = {res.solution.a_star:.5f}")
for c in res.certificate:
    print(f"  k={c.k}: V(w*)={c.value:.4f} vs kV(w*/k)={c.scaled_value:.4f} -> {'ok' if c.passed else 'FAIL'}")

for W in (200.0, 2_000.0, 50_000.0):
    plan = plan_trades(W, model, PlanConfig(), grid, search, mc, w_star=res.w_star)
    print(f"W={W:>8g}: {plan.n_trades} x {plan.per_trade_size:.1f} at a={plan.per_trade_a:.5f} [{plan.mode}]")

# without gas there is nothing to amortize: smaller is always better
try:
    solve_wstar(model.replace(gas=0.0), grid, search, mc)
except NoInteriorOptimum as exc:
    print("gas=0:", exc)

# two pools: the deeper one takes bigger trades and pays better per unit
deep = model.replace(reserve_native=1e7, reserve_target=1e7)
wide = WGridConfig(100.0, 1e6, 17, 8)
for e in plan_multi_pool(1e7, {"1M": model, "10M": deep}, wide, search, mc).entries:
    print(f"pool {e.pool_id:>3}: w*={e.w_star:.0f}  V/w={e.per_unit_value:.6f}")
