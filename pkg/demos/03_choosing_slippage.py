"""
Choosing the slippage offset
============================

The one-shot value of a trade is ``w * E[p/M | fill] - g / F(a)``: a tight
offset saves on MEV but burns gas on failed attempts, a loose one fills
at once but invites the bot.
"""
import numpy as np

from swapparams.amm import PoolState
from swapparams.mev import MevParams
from swapparams.optimizer import McConfig, SearchConfig, objective_estimate, solve_a
from swapparams.stochastic import EstimationError, MarketModel

model = MarketModel(PoolState(1e6, 1e6, 0.003), price_vol=0.002, depth_vol=0.001, gas=1.0,
                    mev=MevParams(attacker_gas=1.0))
mc = McConfig(n_samples=20_000, seed=42)

w = 1e4
print(f"value curve for w={w:g}")
for a in np.geomspace(0.011, 0.05, 12):
    try:
        v, se, F, _ = objective_estimate(a, w, model, mc)
        print(f"  a={a:.4f}  F={F.mean:.3f}  V={v:10.3f} +- {se:.3f}")
    except EstimationError as exc:
        print(f"  a={a:.4f}  {exc}")

sol = solve_a(w, model, SearchConfig(), mc)
print(f"best a={sol.a_star:.5f}, value={sol.value:.3f}, expected attempts={sol.expected_attempts:.2f}")

# No bot: nothing punishes a wide offset, so it only has to clear the noise
quiet = model.replace(enabled=False)
print("no MEV:", solve_a(w, quiet, SearchConfig(), mc).a_star)

# Expensive gas pushes toward offsets that fill on the first try
for gas in (0.0, 1.0, 10.0, 100.0):
    s = solve_a(w, model.replace(gas=gas), SearchConfig(), mc)
    print(f"gas={gas:>5g}  a*={s.a_star:.5f}  F(a*)={s.f_at_a.mean:.3f}")
