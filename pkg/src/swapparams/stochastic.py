"""Martingale price/liquidity dynamics and the Monte Carlo estimators built on them.

One block step moves the reference price by an additive Gaussian shock and
scales pool depth by a multiplicative one, then re-pegs the pool to the new
price (external arbitrage). The fill residual of a trade of size ``w`` is

    eps = Z(pool_1, w) - p_0,

the unattacked execution price after one step minus the price the trader
saw when setting the cutoff. A trade with offset ``a`` fills iff ``eps < a``.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import rng as crng
from .amm import PoolState, exogenous_price_arrays, spot_price
from .mev import MevParams, fill_arrays

MIN_FILLS = 30
MIN_DEPTH_MULTIPLIER = 0.01


class EstimationError(RuntimeError):
    """Base class for Monte Carlo estimates that cannot be formed."""


class InsufficientFills(EstimationError):
    pass


@dataclass(frozen=True)
class MarketModel:
    pool0: PoolState
    price_vol: float = 0.0
    depth_vol: float = 0.0
    gas: float = 0.0
    mev: MevParams = field(default_factory=MevParams)
    price_floor: float | None = None  # None -> 1e-6 * initial price

    def __post_init__(self):
        for name in ("price_vol", "depth_vol", "gas"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.price_floor is None:
            object.__setattr__(self, "price_floor", 1e-6 * spot_price(self.pool0))
        if not self.price_floor > 0:
            raise ValueError(f"price_floor must be > 0, got {self.price_floor}")

    @property
    def p0(self) -> float:
        return spot_price(self.pool0)

    def replace(self, **changes) -> "MarketModel":
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__}
        mev_changes = {k: changes.pop(k) for k in ("attacker_gas", "enabled") if k in changes}
        pool_changes = {k: changes.pop(k) for k in ("reserve_native", "reserve_target", "fee") if k in changes}
        kw.update(changes)
        if mev_changes:
            kw["mev"] = MevParams(**{**asdict(self.mev), **mev_changes})
        if pool_changes:
            kw["pool0"] = PoolState(**{**asdict(self.pool0), **pool_changes})
            if "price_floor" not in changes:
                kw["price_floor"] = None
        return MarketModel(**kw)


def model_hash(model: MarketModel) -> str:
    blob = json.dumps(asdict(model), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class BlockState:
    price: float
    pool: PoolState

    def __post_init__(self):
        if abs(spot_price(self.pool) - self.price) > 1e-9 * self.price:
            raise ValueError("pool spot price must track the reference price")

    @classmethod
    def initial(cls, model: MarketModel) -> "BlockState":
        return cls(model.p0, model.pool0)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    n_effective: int


def advance(price, product, model: MarketModel, z_price, z_depth):
    """One block of the joint price/depth process, elementwise.

    Returns ``(price, product, reserve_native, reserve_target)``.
    """
    new_price = np.maximum(price + model.price_vol * z_price, model.price_floor)
    mult = np.maximum(1.0 + model.depth_vol * z_depth, MIN_DEPTH_MULTIPLIER)
    new_product = product * mult * mult
    return new_price, new_product, np.sqrt(new_product * new_price), np.sqrt(new_product / new_price)


def step_state(state: BlockState, model: MarketModel, rng: np.random.Generator) -> BlockState:
    z_price, z_depth = rng.standard_normal(2)
    if model.price_vol == 0 and model.depth_vol == 0:
        return state
    price, _, rn, rt = advance(state.price, state.pool.product, model, z_price, z_depth)
    return BlockState(float(price), PoolState(float(rn), float(rt), state.pool.fee))


def _chunks(n: int, workers: int):
    size = max(1, -(-n // max(workers, 1)))
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


@lru_cache(maxsize=16)
def _draw_states(model: MarketModel, n: int, seed: int, workers: int):
    def one(bounds):
        idx = np.arange(*bounds, dtype=np.uint64)
        zp = crng.normals(seed, crng.STREAM_EPSILON, idx, 1, 0)
        zd = crng.normals(seed, crng.STREAM_EPSILON, idx, 1, 1)
        return advance(model.p0, model.pool0.product, model, zp, zd)

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as ex:
        parts = list(ex.map(one, _chunks(n, workers)))
    price, _, rn, rt = (np.concatenate(col) for col in zip(*parts))
    for arr in (price, rn, rt):
        arr.setflags(write=False)
    return price, rn, rt


@dataclass(frozen=True, eq=False)
class SampleSet:
    """One-step draws from the initial state, frozen for common random numbers."""

    model: MarketModel
    w: float
    seed: int
    price: np.ndarray
    reserve_native: np.ndarray
    reserve_target: np.ndarray
    eps: np.ndarray

    @property
    def n(self) -> int:
        return self.eps.size

    def key(self) -> str:
        return f"{model_hash(self.model)}_{self.w!r}_{self.n}_{self.seed}"


def draw_samples(model: MarketModel, w: float, n: int, seed: int, workers: int = 1) -> SampleSet:
    if n < 1:
        raise ValueError("need at least one sample")
    if not w > 0:
        raise ValueError(f"trade size must be positive, got {w}")
    price, rn, rt = _draw_states(model, int(n), int(seed), int(workers))
    eps = exogenous_price_arrays(rn, rt, model.pool0.fee, w) - model.p0
    return SampleSet(model, float(w), int(seed), price, rn, rt, eps)


def sample_epsilon(model: MarketModel, w: float, n: int, seed: int) -> np.ndarray:
    return draw_samples(model, w, n, seed).eps.copy()


def estimate_F(samples, a: float) -> McEstimate:
    eps = samples.eps if isinstance(samples, SampleSet) else np.asarray(samples)
    if eps.size == 0:
        raise ValueError("empty sample set")
    p = float(np.count_nonzero(eps < a)) / eps.size
    return McEstimate(p, float(np.sqrt(p * (1.0 - p) / eps.size)), eps.size, eps.size)


def fill_ratio(samples: SampleSet, a: float, mev: MevParams | None = None,
               min_fills: int = MIN_FILLS) -> McEstimate:
    """``E[p_1 / M | eps < a]`` over a frozen sample set.

    ``mev`` overrides the model's attacker, which is how the verification
    negative control feeds a mismatched execution model.
    """
    model = samples.model
    mask = samples.eps < a
    c = model.p0 + a
    out = fill_arrays(samples.reserve_native[mask], samples.reserve_target[mask],
                      model.pool0.fee, samples.w, c, mev if mev is not None else model.mev)
    done = out["executed"]
    n_eff = int(np.count_nonzero(done))
    if n_eff < min_fills:
        raise InsufficientFills(f"only {n_eff} of {samples.n} samples fill at a={a:g} (need {min_fills})")
    ratios = samples.price[mask][done] / out["avg_price"][done]
    return McEstimate(float(ratios.mean()), float(ratios.std(ddof=1) / np.sqrt(n_eff)), samples.n, n_eff)


def conditional_fill_ratio(model: MarketModel, w: float, a: float, n: int, seed: int) -> McEstimate:
    return fill_ratio(draw_samples(model, w, n, seed), a)


class SampleCache:
    """On-disk cache of sample sets keyed by (model hash, w, n, seed)."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path_for(self, model: MarketModel, w: float, n: int, seed: int) -> Path:
        return self.directory / f"eps_{model_hash(model)}_{float(w)!r}_{n}_{seed}.npz"

    def get(self, model: MarketModel, w: float, n: int, seed: int) -> SampleSet:
        path = self.path_for(model, w, n, seed)
        if path.exists():
            return load_samples(path, model)
        samples = draw_samples(model, w, n, seed)
        save_samples(path, samples)
        return samples


def save_samples(path, samples: SampleSet) -> None:
    path = Path(path)
    if path.suffix == ".csv":
        table = np.column_stack([samples.price, samples.reserve_native, samples.reserve_target, samples.eps])
        header = f"key={samples.key()} w={samples.w!r} seed={samples.seed}\nprice,reserve_native,reserve_target,eps"
        np.savetxt(path, table, delimiter=",", header=header, fmt="%.17g")
        return
    with open(path, "wb") as fh:
        np.savez(fh, key=samples.key(), w=samples.w, seed=samples.seed, price=samples.price,
                 reserve_native=samples.reserve_native, reserve_target=samples.reserve_target,
                 eps=samples.eps)


def load_samples(path, model: MarketModel) -> SampleSet:
    path = Path(path)
    if path.suffix == ".csv":
        with open(path) as fh:
            meta = dict(kv.split("=", 1) for kv in fh.readline().lstrip("# ").split())
        table = np.loadtxt(path, delimiter=",", ndmin=2)
        samples = SampleSet(model, float(meta["w"]), int(meta["seed"]), *table.T.copy())
        expected = meta["key"]
    else:
        with np.load(path) as data:
            samples = SampleSet(model, float(data["w"]), int(data["seed"]), data["price"],
                                data["reserve_native"], data["reserve_target"], data["eps"])
            expected = str(data["key"])
    if samples.key() != expected:
        raise ValueError(f"{path} was drawn for a different model or size")
    return samples
