"""Slippage and trade-size optimization on the reduced one-shot objective.

For a trade of size ``w`` with cutoff offset ``a`` the expected value is

    J(a, w) = w * E[p / M | eps < a] - g / F_w(a)

(the first term is the mark-to-market value of a filled trade, the second
the expected gas bill of a geometric number of attempts). ``V(w)`` is the
maximum over ``a`` and the best trade size maximizes ``V(w) / w``, since
splitting wealth ``W`` into ``W / w`` trades yields ``W * V(w) / w``.

All estimates at a given ``w`` share one frozen sample set, and sample sets
at different ``w`` share the same underlying shocks, so scans over ``a``
and comparisons across ``w`` are deterministic and low variance.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mev import MevParams
from .stochastic import (
    MIN_FILLS,
    EstimationError,
    MarketModel,
    McEstimate,
    SampleSet,
    draw_samples,
    estimate_F,
    fill_ratio,
)

INV_PHI = (math.sqrt(5) - 1) / 2


class ZeroFillProbability(EstimationError):
    pass


class NoInteriorOptimum(EstimationError):
    """The per-unit value peaks on the edge of the trade-size grid."""

    def __init__(self, edge: str, curve, strictly_monotone: bool):
        self.edge = edge
        self.curve = curve
        self.strictly_monotone = strictly_monotone
        trend = "strictly " if strictly_monotone else ""
        super().__init__(
            f"per-unit value is maximized at the {edge} edge of the trade-size grid "
            f"({trend}improving toward it); widen the grid"
        )


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 20_000
    seed: int = 42
    workers: int = 1


@dataclass(frozen=True)
class SearchConfig:
    a_lo: float | None = None  # None -> 1e-4 * p0
    a_hi: float | None = None  # None -> 0.5 * p0
    a_points: int = 64
    refine_iters: int = 30
    min_fills: int = MIN_FILLS

    def bracket(self, p0: float) -> tuple[float, float]:
        lo = self.a_lo if self.a_lo is not None else 1e-4 * p0
        hi = self.a_hi if self.a_hi is not None else 0.5 * p0
        if not 0 < lo < hi:
            raise ValueError(f"invalid slippage bracket [{lo}, {hi}]")
        return lo, hi


@dataclass(frozen=True)
class WGridConfig:
    w_lo: float = 1e2
    w_hi: float = 1e5
    w_points: int = 25
    refine_iters: int = 20
    k_values: tuple = (1.01, 0.99)

    def grid(self) -> np.ndarray:
        return np.geomspace(self.w_lo, self.w_hi, self.w_points)


@dataclass(frozen=True)
class PlanConfig:
    threshold: float = 5.0
    n_max: int = 20


@dataclass(frozen=True)
class SlippageSolution:
    w: float
    a_star: float
    value: float
    value_se: float
    f_at_a: McEstimate
    ratio_at_a: McEstimate

    @property
    def expected_attempts(self) -> float:
        return 1.0 / self.f_at_a.mean

    @property
    def per_unit(self) -> float:
        return self.value / self.w


@dataclass(frozen=True)
class ValuePoint:
    w: float
    solution: SlippageSolution | None
    error: str | None = None


@dataclass(frozen=True)
class CertificateCheck:
    k: float
    value: float          # V(w*)
    scaled_value: float   # k * V(w* / k)
    sigma: float
    passed: bool


@dataclass(frozen=True)
class WStarResult:
    w_star: float
    solution: SlippageSolution
    certificate: list[CertificateCheck]
    local_maxima: list[float]
    curve: list[ValuePoint]

    @property
    def certified(self) -> bool:
        return all(c.passed for c in self.certificate)


@dataclass(frozen=True)
class TradePlan:
    n_trades: int
    per_trade_size: float
    per_trade_a: float
    expected_total_value: float
    mode: str  # "large-wealth" | "iterative-search"
    candidates: list = field(default_factory=list)  # (n, total value) tried by the search

    def __post_init__(self):
        if self.n_trades < 1:
            raise ValueError("a plan needs at least one trade")


@dataclass(frozen=True)
class PoolEntry:
    pool_id: str
    w_star: float
    per_unit_value: float
    a_star: float


@dataclass(frozen=True)
class MultiPoolPlan:
    entries: list[PoolEntry]
    skipped: list[tuple[str, str]] = field(default_factory=list)


def _evaluate(a: float, samples: SampleSet, mev: MevParams | None = None,
              min_fills: int = MIN_FILLS) -> tuple[float, float, McEstimate, McEstimate]:
    F = estimate_F(samples, a)
    if F.mean == 0.0:
        raise ZeroFillProbability(f"no sample fills at a={a:g}; gas would be paid forever")
    ratio = fill_ratio(samples, a, mev=mev, min_fills=min_fills)
    gas = samples.model.gas
    value = samples.w * ratio.mean - gas / F.mean
    se = math.hypot(samples.w * ratio.std_error, gas * F.std_error / F.mean**2)
    return value, se, F, ratio


def objective(a: float, w: float, model: MarketModel, mc: McConfig = McConfig()) -> float:
    samples = draw_samples(model, w, mc.n_samples, mc.seed, mc.workers)
    return _evaluate(a, samples)[0]


def objective_estimate(a: float, w: float, model: MarketModel, mc: McConfig = McConfig(),
                       mev: MevParams | None = None) -> tuple[float, float, McEstimate, McEstimate]:
    """``(value, std_error, F, ratio)``; ``mev`` replaces the model's attacker in the fill term."""
    samples = draw_samples(model, w, mc.n_samples, mc.seed, mc.workers)
    return _evaluate(a, samples, mev=mev)


def golden_max(f, lo: float, hi: float, iters: int):
    """Golden-section search for a maximum of ``f`` on ``[lo, hi]``.

    Returns the best ``(x, f(x))`` seen. Ties keep the left point.
    """
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    best = max(((fc, -c), (fd, -d)))
    for _ in range(iters):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
            best = max(best, (fc, -c))
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
            best = max(best, (fd, -d))
    return -best[1], best[0]


def _solve_on(samples: SampleSet, search: SearchConfig) -> SlippageSolution:
    lo, hi = search.bracket(samples.model.p0)
    grid = np.geomspace(lo, hi, search.a_points)

    def f(a):
        try:
            return _evaluate(a, samples, min_fills=search.min_fills)[0]
        except EstimationError:
            return -math.inf

    vals = np.array([f(a) for a in grid])
    if not np.isfinite(vals).any():
        raise ZeroFillProbability(
            f"no slippage offset in [{lo:g}, {hi:g}] fills often enough for w={samples.w:g}")
    i = int(np.argmax(vals))  # first maximum, i.e. the smallest a among ties
    a_best, v_best = float(grid[i]), float(vals[i])
    if search.refine_iters > 0:
        left, right = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        x, fx = golden_max(lambda t: f(math.exp(t)), math.log(left), math.log(right), search.refine_iters)
        if fx > v_best:
            a_best, v_best = math.exp(x), fx
    value, se, F, ratio = _evaluate(a_best, samples, min_fills=search.min_fills)
    return SlippageSolution(samples.w, a_best, value, se, F, ratio)


def solve_a(w: float, model: MarketModel, search: SearchConfig = SearchConfig(),
            mc: McConfig = McConfig()) -> SlippageSolution:
    """Best cutoff offset for a single trade of size ``w``.

    A 64-point log grid over the bracket locates the best cell and a golden
    section search refines inside its neighbours. The refined point replaces
    the grid point only if it is strictly better, so flat objectives resolve
    to the smallest grid offset.
    """
    return _solve_on(draw_samples(model, w, mc.n_samples, mc.seed, mc.workers), search)


def value_function(w_grid, model: MarketModel, search: SearchConfig = SearchConfig(),
                   mc: McConfig = McConfig()) -> list[ValuePoint]:
    w_grid = [float(w) for w in w_grid]
    if any(w <= 0 for w in w_grid) or any(b <= a for a, b in zip(w_grid, w_grid[1:])):
        raise ValueError("trade-size grid must be positive and strictly ascending")

    def point(w):
        try:
            return ValuePoint(w, solve_a(w, model, search, mc))
        except EstimationError as exc:
            return ValuePoint(w, None, str(exc))

    with ThreadPoolExecutor(max_workers=max(mc.workers, 1)) as ex:
        return list(ex.map(point, w_grid))


def _per_unit_solution(w, model, search, mc):
    try:
        sol = solve_a(w, model, search, mc)
        return sol.per_unit, sol
    except EstimationError:
        return -math.inf, None


def solve_wstar(model: MarketModel, grid: WGridConfig = WGridConfig(),
                search: SearchConfig = SearchConfig(), mc: McConfig = McConfig()) -> WStarResult:
    """Trade size that maximizes value per unit of wealth.

    Raises :class:`NoInteriorOptimum` when the maximum sits on the first or
    last grid point that could be solved.
    """
    if grid.w_hi / grid.w_lo < 100:
        raise ValueError("trade-size grid must span at least two orders of magnitude")
    curve = value_function(grid.grid(), model, search, mc)
    ok = [p for p in curve if p.solution is not None]
    if len(ok) < 3:
        raise ZeroFillProbability("fewer than three trade sizes could be solved")
    unit = np.array([p.solution.per_unit for p in ok])
    i = int(np.argmax(unit))
    if i == 0 or i == len(ok) - 1:
        edge = "lower" if i == 0 else "upper"
        steps = np.diff(unit)
        strictly = bool(np.all(steps < 0)) if edge == "lower" else bool(np.all(steps > 0))
        raise NoInteriorOptimum(edge, curve, strictly)

    best_w, best = ok[i].w, ok[i].solution
    if grid.refine_iters > 0:
        cache = {}

        def f(t):
            if t not in cache:
                cache[t] = _per_unit_solution(math.exp(t), model, search, mc)
            return cache[t][0]

        t, fx = golden_max(f, math.log(ok[i - 1].w), math.log(ok[i + 1].w), grid.refine_iters)
        if fx > best.per_unit:
            best_w, best = math.exp(t), cache[t][1]

    checks = []
    for k in grid.k_values:
        other = solve_a(best_w / k, model, search, mc)
        sigma = math.hypot(best.value_se, k * other.value_se)
        scaled = k * other.value
        checks.append(CertificateCheck(k, best.value, scaled, sigma, best.value >= scaled - 3 * sigma))
    local = [ok[j].w for j in range(1, len(ok) - 1) if unit[j] >= unit[j - 1] and unit[j] >= unit[j + 1]]
    return WStarResult(best_w, best, checks, local, curve)


def plan_trades(W: float, model: MarketModel, cfg: PlanConfig = PlanConfig(),
                grid: WGridConfig = WGridConfig(), search: SearchConfig = SearchConfig(),
                mc: McConfig = McConfig(), w_star: float | None = None) -> TradePlan:
    """Split ``W`` into equal trades.

    Large wealth uses ``round(W / w*)`` trades. Below ``threshold * w*`` the
    number of trades ``n = 1..n_max`` maximizing ``n * V(W / n)`` is searched
    directly, ties going to fewer trades.
    """
    if not W > 0:
        raise ValueError(f"wealth must be positive, got {W}")
    if w_star is None:
        w_star = solve_wstar(model, grid, search, mc).w_star
    if W >= cfg.threshold * w_star:
        n = max(1, int(round(W / w_star)))
        sol = solve_a(W / n, model, search, mc)
        return TradePlan(n, W / n, sol.a_star, n * sol.value, "large-wealth")

    best = None
    tried = []
    for n in range(1, cfg.n_max + 1):
        try:
            sol = solve_a(W / n, model, search, mc)
        except EstimationError:
            continue
        tried.append((n, n * sol.value))
        if best is None or n * sol.value > best[0]:
            best = (n * sol.value, n, sol)
    if best is None:
        raise ZeroFillProbability(f"no split of W={W:g} into 1..{cfg.n_max} trades could be solved")
    total, n, sol = best
    return TradePlan(n, W / n, sol.a_star, total, "iterative-search", tried)


def plan_multi_pool(W: float, models, grid: WGridConfig = WGridConfig(),
                    search: SearchConfig = SearchConfig(), mc: McConfig = McConfig()) -> MultiPoolPlan:
    """Independent best trade sizes for several pools, best per-unit value first.

    ``models`` is a mapping of pool id to model, or a sequence (ids become
    ``"0"``, ``"1"``, ...). Each block the trader fires one ``w_i*`` trade in
    every listed pool until wealth runs out.
    """
    items = models.items() if hasattr(models, "items") else ((str(i), m) for i, m in enumerate(models))
    entries, skipped = [], []
    for pool_id, model in items:
        try:
            res = solve_wstar(model, grid, search, mc)
        except EstimationError as exc:
            warnings.warn(f"pool {pool_id} omitted: {exc}", stacklevel=2)
            skipped.append((pool_id, str(exc)))
            continue
        entries.append(PoolEntry(pool_id, res.w_star, res.solution.per_unit, res.solution.a_star))
    entries.sort(key=lambda e: -e.per_unit_value)
    if entries and W < sum(e.w_star for e in entries):
        warnings.warn("wealth is smaller than one round of trades across all pools", stacklevel=2)
    return MultiPoolPlan(entries, skipped)
