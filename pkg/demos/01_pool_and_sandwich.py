"""
Swapping through a pool, with and without a sandwich bot
========================================================

A 1000/1000 pool, a trader with 100 native to spend.
"""
from swapparams.amm import PoolState, exogenous_price, spot_price, swap_output
from swapparams.mev import MevParams, attacker_profit, endogenous_fill, optimal_frontrun, pin_frontrun

pool = PoolState(1000.0, 1000.0, fee=0.0)
print("spot price", spot_price(pool))

delta, after = swap_output(pool, 100.0)
print("100 native buys", delta, "target; pool is now", after)
print("average price Z =", exogenous_price(pool, 100.0))

# bigger trades pay more per unit
for w in (1, 10, 100, 1000):
    print(f"  w={w:>5}  Z={exogenous_price(pool, w):.4f}")

# The trader accepts any fill up to c = 1.2. A bot front-runs just enough
# to push the trader's fill to that limit, then sells back.
c = 1.2
b = optimal_frontrun(pool, 100.0, c)
print("front-run size", b, "bot gross profit", attacker_profit(pool, 100.0, b))

for gas in (0.0, 5.0, 1e9):
    res = endogenous_fill(pool, 100.0, c, MevParams(attacker_gas=gas))
    print(f"  attacker gas {gas:>8g}: attacked={res.attacked}  fill price={res.avg_price:.4f}")

# a tolerance below Z just reverts
print(endogenous_fill(pool, 100.0, 1.05, MevParams()))

# With a fee, the bot's own round trip costs it twice. Pinning the fill at
# a loose cutoff would need a front-run so large that the fees eat the
# gain, so the bot stops short and the trader fills below c.
fee_pool = PoolState(1e6, 1e6, fee=0.003)
w, c = 3162.0, 1.25
b_pin, b = pin_frontrun(fee_pool, w, c), optimal_frontrun(fee_pool, w, c)
print(f"pin needs b={b_pin:.0f} (profit {attacker_profit(fee_pool, w, b_pin):.1f}), "
      f"best is b={b:.0f} (profit {attacker_profit(fee_pool, w, b):.1f})")
res = endogenous_fill(fee_pool, w, c, MevParams())
print(f"Z={exogenous_price(fee_pool, w):.4f}  fill={res.avg_price:.4f}  c={c}")
