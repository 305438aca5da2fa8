"""
Does the one-shot formula match a full simulation?
==================================================

The optimizer never simulates a block sequence: it uses the residual CDF
and the conditional fill ratio. Here a block-by-block simulation (retry
every block, pay gas each time, hold to a later terminal price) is run
side by side with the formula.
"""
import math

from swapparams.amm import PoolState
from swapparams.mev import MevParams
from swapparams.optimizer import McConfig, TradePlan, objective_estimate
from swapparams.sim import SimConfig, simulate_one_shot, simulate_plan
from swapparams.stochastic import MarketModel
from swapparams.verification import offsets_at_levels

model = MarketModel(PoolState(1e6, 1e6, 0.003), price_vol=0.002, depth_vol=0.001, gas=1.0,
                    mev=MevParams(attacker_gas=1.0))
sim = SimConfig(n_paths=20_000, seed=42)

for w in (1e3, 1e4):
    for a in offsets_at_levels(model, w, (0.3, 0.9), seed=43):
        v, se, F, _ = objective_estimate(a, w, model, McConfig(50_000, 42))
        s = simulate_one_shot(a, w, model, sim)
        z = (s.mean_value.mean - v) / math.hypot(se, s.mean_value.std_error)
        print(f"w={w:>6g} a={a:.5f}  formula {v:10.3f}  sim {s.mean_value.mean:10.3f}  z={z:+.2f}  "
              f"attempts {s.mean_attempts.mean:.3f} vs 1/F {1 / F.mean:.3f}")

# What if the formula forgets the bot? At w=1e4 it overstates the value.
a = offsets_at_levels(model, 1e4, (0.9,), seed=43)[0]
v_naive = objective_estimate(a, 1e4, model, McConfig(50_000, 42), mev=MevParams(enabled=False))[0]
print(f"ignoring MEV: formula {v_naive:.3f} vs sim {simulate_one_shot(a, 1e4, model, sim).mean_value.mean:.3f}")

# Ten trades of 1000 against one trade of 10000
ten = simulate_plan(TradePlan(10, 1000.0, 0.013, float("nan"), "manual"), model, sim).mean_value
one = simulate_plan(TradePlan(1, 10_000.0, 0.02, float("nan"), "manual"), model, sim).mean_value
print(f"10 x 1000: {ten.mean:.2f} +- {ten.std_error:.2f}   1 x 10000: {one.mean:.2f} +- {one.std_error:.2f}")
