"""
How often does a cutoff fill?
=============================

Each block the price and pool depth take a random step. A swap sent with
cutoff ``p + a`` fills when the realized average price lands below it, i.e.
when the residual ``eps = Z - p`` is below ``a``.
"""
import numpy as np

from swapparams.amm import PoolState
from swapparams.mev import MevParams
from swapparams.stochastic import MarketModel, conditional_fill_ratio, draw_samples, estimate_F

model = MarketModel(PoolState(1e6, 1e6, 0.003), price_vol=0.002, depth_vol=0.001, gas=1.0,
                    mev=MevParams(attacker_gas=1.0))

samples = draw_samples(model, w=1000.0, n=20_000, seed=42)
eps = samples.eps
print("residual quantiles (5, 50, 95%):", np.quantile(eps, [0.05, 0.5, 0.95]))

# empirical CDF with binomial standard errors
for a in (0.002, 0.004, 0.006, 0.008):
    F = estimate_F(samples, a)
    print(f"a={a:.3f}  F={F.mean:.4f} +- {F.std_error:.4f}")

# Bigger trades shift the whole residual distribution right
for w in (1e2, 1e3, 1e4):
    e = draw_samples(model, w, 20_000, 42).eps
    print(f"w={w:>7g}  median eps={np.median(e):.5f}")

# Value received per native spent, given a fill. At w=1e4 sandwiches are
# profitable and loose cutoffs get pinned, so the ratio falls as a grows.
for a in (0.012, 0.015, 0.02, 0.04):
    r = conditional_fill_ratio(model, 1e4, a, 20_000, 42)
    print(f"w=1e4 a={a:.3f}  E[p/M | fill] = {r.mean:.5f} ({r.n_effective} fills)")

# Same draws every time, no matter how many threads
assert draw_samples(model, 1e3, 20_000, 42, workers=4).eps.tobytes() == eps.tobytes()
