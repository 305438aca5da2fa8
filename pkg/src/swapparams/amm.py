"""Constant-product pool state and the no-MEV execution price.

Prices are quoted in native per target everywhere: the trader pays the
native asset and receives the target asset.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PoolState:
    """Reserves and input-side fee of an ``x * y = k`` pool."""

    reserve_native: float
    reserve_target: float
    fee: float = 0.0

    def __post_init__(self):
        if not (self.reserve_native > 0 and self.reserve_target > 0):
            raise ValueError(
                f"reserves must be positive, got ({self.reserve_native}, {self.reserve_target})"
            )
        if not (0.0 <= self.fee < 1.0):
            raise ValueError(f"fee must lie in [0, 1), got {self.fee}")

    @property
    def product(self) -> float:
        return self.reserve_native * self.reserve_target

    @classmethod
    def from_price(cls, price: float, product: float, fee: float = 0.0) -> "PoolState":
        """Pool with the given spot price and reserve product."""
        return cls(float(np.sqrt(product * price)), float(np.sqrt(product / price)), fee)


def spot_price(pool: PoolState) -> float:
    return pool.reserve_native / pool.reserve_target


def target_out(reserve_in, reserve_out, amount_in, fee):
    """Output of a constant-product swap; works elementwise on arrays."""
    effective = amount_in * (1.0 - fee)
    return reserve_out * effective / (reserve_in + effective)


def reserve_out_after(reserve_in, reserve_out, amount_in, fee):
    """Out-side reserve after a swap, written without the ``R - delta`` cancellation."""
    return reserve_out * reserve_in / (reserve_in + amount_in * (1.0 - fee))


def swap_output(pool: PoolState, w: float) -> tuple[float, PoolState]:
    """Buy target with ``w`` native. The fee stays in the pool."""
    if w < 0:
        raise ValueError(f"swap input must be non-negative, got {w}")
    if w == 0:
        return 0.0, pool
    delta = target_out(pool.reserve_native, pool.reserve_target, w, pool.fee)
    rt = reserve_out_after(pool.reserve_native, pool.reserve_target, w, pool.fee)
    after = PoolState(pool.reserve_native + w, rt, pool.fee)
    return delta, after


def sell_target(pool: PoolState, amount: float) -> tuple[float, PoolState]:
    """Sell ``amount`` target into the pool; returns native received."""
    if amount < 0:
        raise ValueError(f"swap input must be non-negative, got {amount}")
    if amount == 0:
        return 0.0, pool
    out = target_out(pool.reserve_target, pool.reserve_native, amount, pool.fee)
    rn = reserve_out_after(pool.reserve_target, pool.reserve_native, amount, pool.fee)
    after = PoolState(rn, pool.reserve_target + amount, pool.fee)
    return out, after


def exogenous_price_arrays(reserve_native, reserve_target, fee, w):
    # (R_n + w(1-f)) / (R_t (1-f)), identical to w / delta but without the cancellation
    return (reserve_native + w * (1.0 - fee)) / (reserve_target * (1.0 - fee))


def exogenous_price(pool: PoolState, w: float) -> float:
    """Average price paid for ``w`` native when nobody interferes with the swap.

    The ``w -> 0`` limit is ``spot_price(pool) / (1 - fee)``; this function
    rejects ``w <= 0`` rather than returning it.
    """
    if not w > 0:
        raise ValueError(f"trade size must be positive, got {w}")
    return float(exogenous_price_arrays(pool.reserve_native, pool.reserve_target, pool.fee, w))
