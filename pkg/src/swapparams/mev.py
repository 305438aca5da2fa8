"""Execution price under a single sandwich attacker.

The attacker is myopic and greedy. It picks the front-run size that
maximizes its sandwich profit subject to the trader's fill staying within
the cutoff ``c``, and attacks only if that profit beats two transactions'
worth of gas. Without a pool fee the cutoff always binds and the trader is
filled exactly at ``c``; with a fee the attacker's own round-trip cost can
make a smaller front-run more profitable, leaving the fill below ``c``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .amm import PoolState, exogenous_price, exogenous_price_arrays, reserve_out_after, target_out


@dataclass(frozen=True)
class MevParams:
    attacker_gas: float = 0.0
    enabled: bool = True

    def __post_init__(self):
        if self.attacker_gas < 0:
            raise ValueError(f"attacker_gas must be >= 0, got {self.attacker_gas}")


@dataclass(frozen=True)
class FillResult:
    executed: bool
    avg_price: float | None = None
    attacked: bool = False
    frontrun_size: float = 0.0


def pin_frontrun_arrays(rn, rt, fee, w, c):
    """Front-run size that puts the trader's fill exactly at ``c``.

    After a front-run of ``b`` native the trader's average price is
    ``(R_n + b + w')(R_n + b(1-f)) / (R_n R_t (1-f))`` with ``w' = w(1-f)``,
    so ``b`` is the positive root of a quadratic. Where ``c`` does not
    exceed the unattacked price the result is clipped to 0.
    """
    g = 1.0 - fee
    wf = w * g
    qa = g
    qb = (rn + wf) * g + rn
    qc = (rn + wf) * rn - c * rt * rn * g
    disc = np.maximum(qb * qb - 4.0 * qa * qc, 0.0)
    # -2C / (B + sqrt(D)) avoids cancellation when the room to attack is small
    b = -2.0 * qc / (qb + np.sqrt(disc))
    return np.maximum(b, 0.0)


def profit_critical_points(rn, rt, fee, w):
    """Roots in ``b`` of the derivative of the sandwich profit.

    The derivative's numerator is the quadratic ``A b^2 + B b + C`` below.
    Returns both roots (NaN where they do not exist).
    """
    g = 1.0 - fee
    qa = fee * (g * g * w - rn * (1.0 + g))
    qb = 2.0 * rn * (rn * (g * g - 1.0) + g * g * w)
    qc = rn * (rn * rn * (g * g - 1.0) + rn * w * g * g * (1.0 + g) + g**3 * w * w)
    qa, qb, qc = np.broadcast_arrays(qa, qb, qc)
    with np.errstate(invalid="ignore", divide="ignore"):
        disc = qb * qb - 4.0 * qa * qc
        q = -0.5 * (qb + np.copysign(np.sqrt(disc), qb))
        r1 = np.where(qa != 0, q / qa, np.where(qb != 0, -qc / qb, np.nan))
        r2 = np.where(qa != 0, qc / q, np.nan)
    return r1, r2


def best_frontrun_arrays(rn, rt, fee, w, b_pin):
    """Profit-maximizing front-run on ``[0, b_pin]``.

    The optimum sits at the cap or at an interior critical point; both are
    evaluated and the better one wins (the smaller on ties).
    """
    best = b_pin
    best_profit = sandwich_arrays(rn, rt, fee, w, b_pin)[1]
    for r in profit_critical_points(rn, rt, fee, w):
        inside = np.isfinite(r) & (r > 0) & (r < b_pin)
        cand = np.where(inside, r, b_pin)
        profit = sandwich_arrays(rn, rt, fee, w, cand)[1]
        better = inside & (profit >= best_profit)
        best = np.where(better, cand, best)
        best_profit = np.where(better, profit, best_profit)
    return best


def sandwich_arrays(rn, rt, fee, w, b):
    """Replay front-run, trader swap and back-run.

    Returns ``(trader_target, attacker_gross_profit, rn_after, rt_after)``.
    """
    got = target_out(rn, rt, b, fee)
    rn1, rt1 = rn + b, reserve_out_after(rn, rt, b, fee)
    delta = target_out(rn1, rt1, w, fee)
    rn2, rt2 = rn1 + w, reserve_out_after(rn1, rt1, w, fee)
    back = target_out(rt2, rn2, got, fee)
    return delta, back - b, reserve_out_after(rt2, rn2, got, fee), rt2 + got


def fill_arrays(rn, rt, fee, w, c, mev: MevParams):
    """Vectorized fill used by the Monte Carlo code.

    Returns a dict of arrays: ``executed``, ``attacked``, ``avg_price`` (NaN
    where not executed), ``frontrun`` and the post-trade reserves.
    """
    rn, rt, fee, w, c = (np.atleast_1d(x).astype(float) for x in np.broadcast_arrays(rn, rt, fee, w, c))
    z = exogenous_price_arrays(rn, rt, fee, w)
    executed = z < c
    rn_after = np.where(executed, rn + w, rn)
    rt_after = np.where(executed, reserve_out_after(rn, rt, w, fee), rt)
    avg = np.where(executed, z, np.nan)
    frontrun = np.zeros_like(rn)
    attacked = np.zeros_like(executed)
    if mev.enabled and executed.any():
        idx = np.flatnonzero(executed)
        r_n, r_t, f, x = rn[idx], rt[idx], fee[idx], w[idx]
        b_pin = pin_frontrun_arrays(r_n, r_t, f, x, c[idx])
        b = best_frontrun_arrays(r_n, r_t, f, x, b_pin)
        delta, profit, rn3, rt3 = sandwich_arrays(r_n, r_t, f, x, b)
        hit = (b > 0) & (profit > 2.0 * mev.attacker_gas)
        sel = idx[hit]
        attacked[sel] = True
        frontrun[sel] = b[hit]
        avg[sel] = np.where(b[hit] >= b_pin[hit], c[sel], np.minimum(x[hit] / delta[hit], c[sel]))
        rn_after[sel] = rn3[hit]
        rt_after[sel] = rt3[hit]
    return {
        "executed": executed,
        "attacked": attacked,
        "avg_price": avg,
        "frontrun": frontrun,
        "reserve_native": rn_after,
        "reserve_target": rt_after,
    }


def _check_room(pool: PoolState, w: float, c: float) -> None:
    if not w > 0:
        raise ValueError(f"trade size must be positive, got {w}")
    z = exogenous_price(pool, w)
    if not c > z:
        raise ValueError(f"cutoff {c} leaves no room to attack (unattacked price {z})")


def pin_frontrun(pool: PoolState, w: float, c: float) -> float:
    """Front-run after which the trader's average fill equals ``c`` exactly."""
    _check_room(pool, w, c)
    return float(pin_frontrun_arrays(pool.reserve_native, pool.reserve_target, pool.fee, w, c))


def optimal_frontrun(pool: PoolState, w: float, c: float) -> float:
    """Front-run maximizing the attacker's gross profit with the fill kept ``<= c``.

    Equals :func:`pin_frontrun` whenever the cutoff binds, which is always
    the case for a fee-free pool.
    """
    _check_room(pool, w, c)
    rn, rt, fee = pool.reserve_native, pool.reserve_target, pool.fee
    return float(best_frontrun_arrays(rn, rt, fee, w, pin_frontrun_arrays(rn, rt, fee, w, c)))


def attacker_profit(pool: PoolState, w: float, b: float) -> float:
    """Gross profit (before gas) of sandwiching ``w`` with a ``b`` front-run."""
    return float(sandwich_arrays(pool.reserve_native, pool.reserve_target, pool.fee, w, b)[1])


def endogenous_fill(pool: PoolState, w: float, c: float, mev: MevParams) -> FillResult:
    if not w > 0:
        raise ValueError(f"trade size must be positive, got {w}")
    if not c > 0:
        raise ValueError(f"cutoff must be positive, got {c}")
    out = fill_arrays(pool.reserve_native, pool.reserve_target, pool.fee, w, c, mev)
    if not out["executed"][0]:
        return FillResult(executed=False)
    return FillResult(
        executed=True,
        avg_price=float(out["avg_price"][0]),
        attacked=bool(out["attacked"][0]),
        frontrun_size=float(out["frontrun"][0]),
    )
