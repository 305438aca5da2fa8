"""Block-by-block simulation of the sequential swap game.

Each path starts from the model's initial state. Every block the market
steps, the trader (if still trading) submits a swap with cutoff
``previous price + a`` and pays gas whether or not it fills. Once the last
trade of the plan fills, or the attempt cap is hit, the path runs
``extra_blocks`` more steps and its holdings are marked at that terminal
price. Nothing here uses the residual CDF or the fill-ratio estimator, so
the simulator is an independent check on the reduced objective.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as crng
from .amm import exogenous_price_arrays
from .mev import fill_arrays
from .stochastic import MarketModel, McEstimate, advance


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 10_000
    max_blocks: int = 512
    extra_blocks: int = 32
    seed: int = 42
    workers: int = 1

    def __post_init__(self):
        if self.n_paths < 1 or self.max_blocks < 1 or self.extra_blocks < 0:
            raise ValueError(f"invalid simulation config {self}")


@dataclass(frozen=True)
class SimResult:
    mean_value: McEstimate
    mean_attempts: McEstimate
    fill_rate: float
    mean_fill_price: McEstimate


def _estimate(x: np.ndarray, n_samples: int) -> McEstimate:
    if x.size == 0:
        return McEstimate(float("nan"), float("nan"), n_samples, 0)
    se = float(x.std(ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
    return McEstimate(float(x.mean()), se, n_samples, int(x.size))


def _run_paths(lo, hi, n_trades, w, a, model: MarketModel, cfg: SimConfig, trace_upto: int):
    n = hi - lo
    paths = np.arange(lo, hi, dtype=np.uint64)
    fee, gas = model.pool0.fee, model.gas
    price = np.full(n, model.p0)
    product = np.full(n, model.pool0.product)
    trades_done = np.zeros(n, dtype=np.int64)
    tries = np.zeros(n, dtype=np.int64)  # attempts on the current trade
    attempts = np.zeros(n, dtype=np.int64)
    target = np.zeros(n)
    fill_price_sum = np.zeros(n)
    trading = np.ones(n, dtype=bool)
    extra_left = np.full(n, cfg.extra_blocks, dtype=np.int64)
    terminal = np.full(n, np.nan)
    pending = np.ones(n, dtype=bool)
    rows = []

    block = 0
    while pending.any():
        block += 1
        idx = np.flatnonzero(pending)
        zp = crng.normals(cfg.seed, crng.STREAM_SIM, paths[idx], block, 0)
        zd = crng.normals(cfg.seed, crng.STREAM_SIM, paths[idx], block, 1)
        prev = price[idx]
        new_price, new_product, rn, rt = advance(prev, product[idx], model, zp, zd)
        price[idx] = new_price
        product[idx] = new_product

        tmask = trading[idx]
        ti = idx[tmask]
        if ti.size:
            c = prev[tmask] + a
            out = fill_arrays(rn[tmask], rt[tmask], fee, w, c, model.mev)
            filled = out["executed"]
            attempts[ti] += 1
            tries[ti] += 1
            fi = ti[filled]
            target[fi] += w / out["avg_price"][filled]
            fill_price_sum[fi] += out["avg_price"][filled]
            product[fi] = out["reserve_native"][filled] * out["reserve_target"][filled]
            trades_done[fi] += 1
            tries[fi] = 0
            finished = (trades_done[ti] >= n_trades) | (tries[ti] >= cfg.max_blocks)
            trading[ti[finished]] = False
            if trace_upto > lo:
                z = exogenous_price_arrays(rn[tmask], rt[tmask], fee, w)
                for j in np.flatnonzero(paths[ti] < trace_upto):
                    p = ti[j]
                    rows.append((int(paths[p]), block, float(new_price[tmask][j]), float(z[j]), float(c[j]),
                                 bool(filled[j]), bool(out["attacked"][j]), float(gas * attempts[p])))
            just_done = ti[finished]
        else:
            just_done = ti

        # paths already past their last trade count down the valuation window
        waiting = idx[~tmask]
        extra_left[waiting] -= 1
        newly = np.concatenate([just_done[extra_left[just_done] == 0], waiting[extra_left[waiting] <= 0]])
        terminal[newly] = price[newly]
        pending[newly] = False

    values = terminal * target - gas * attempts
    return {
        "values": values,
        "attempts": attempts,
        "trades_done": trades_done,
        "fill_price_sum": fill_price_sum,
        "rows": rows,
    }


def _simulate(n_trades: int, w: float, a: float, model: MarketModel, cfg: SimConfig,
              trace=None, trace_paths: int = 100) -> SimResult:
    if not a > 0:
        raise ValueError(f"slippage offset must be positive, got {a}")
    if not w > 0:
        raise ValueError(f"trade size must be positive, got {w}")
    trace_upto = trace_paths if trace is not None else 0
    size = -(-cfg.n_paths // max(cfg.workers, 1))
    bounds = [(lo, min(lo + size, cfg.n_paths)) for lo in range(0, cfg.n_paths, size)]
    with ThreadPoolExecutor(max_workers=max(cfg.workers, 1)) as ex:
        parts = list(ex.map(lambda b: _run_paths(*b, n_trades, w, a, model, cfg, trace_upto), bounds))
    merged = {k: np.concatenate([p[k] for p in parts]) for k in ("values", "attempts", "trades_done", "fill_price_sum")}

    if trace is not None:
        rows = sorted((r for p in parts for r in p["rows"]), key=lambda r: (r[0], r[1]))
        with open(trace, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["path", "block", "price", "Z", "c", "filled", "attacked", "gas_paid"])
            writer.writerows(rows)

    done = merged["trades_done"]
    complete = done >= n_trades
    fill_prices = merged["fill_price_sum"][done > 0] / done[done > 0]
    return SimResult(
        mean_value=_estimate(merged["values"], cfg.n_paths),
        mean_attempts=_estimate(merged["attempts"].astype(float), cfg.n_paths),
        fill_rate=float(complete.mean()),
        mean_fill_price=_estimate(fill_prices, cfg.n_paths),
    )


def simulate_one_shot(a: float, w: float, model: MarketModel, cfg: SimConfig, trace=None,
                      trace_paths: int = 100) -> SimResult:
    """Swap ``w`` in one trade with cutoff offset ``a``, retrying each block until it fills."""
    return _simulate(1, w, a, model, cfg, trace, trace_paths)


def simulate_plan(plan, model: MarketModel, cfg: SimConfig, trace=None, trace_paths: int = 100) -> SimResult:
    """Execute ``plan.n_trades`` equal swaps back to back on one evolving path.

    Pool depth carries over between trades (the fee the trader and any
    attacker leave in the pool stays there); the reference price does not
    react to the trader's own flow.
    """
    if plan.n_trades < 1:
        raise ValueError("plan needs at least one trade")
    return _simulate(plan.n_trades, plan.per_trade_size, plan.per_trade_a, model, cfg, trace, trace_paths)
