"""Run configuration: a TOML file (or the same schema as JSON) -> typed objects.

Every problem is reported with the offending key path and, for TOML input,
the line it sits on.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .amm import PoolState
from .mev import MevParams
from .optimizer import McConfig, PlanConfig, SearchConfig, WGridConfig
from .sim import SimConfig
from .stochastic import MarketModel


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class VerifyConfig:
    w_values: tuple = (1_000.0, 3_000.0, 10_000.0)
    a_values: tuple | None = None  # None -> offsets at the residual quantiles in fill_levels
    fill_levels: tuple = (0.3, 0.6, 0.9)
    n_paths: int = 100_000
    n_samples: int = 100_000
    analytic_mev_enabled: bool | None = None  # None -> same attacker as the simulator
    min_paths: int = 1_000


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    format: str = "json"


@dataclass(frozen=True)
class RunConfig:
    market: MarketModel
    mc: McConfig = McConfig()
    search: SearchConfig = SearchConfig()
    wgrid: WGridConfig = WGridConfig()
    plan: PlanConfig = PlanConfig()
    sim: SimConfig = SimConfig()
    verify: VerifyConfig = VerifyConfig()
    wealth: float = 10_000.0
    output: OutputConfig = field(default_factory=OutputConfig)

    def with_overrides(self, seed=None, workers=None, out=None, fmt=None) -> "RunConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, mc=replace(cfg.mc, seed=seed), sim=replace(cfg.sim, seed=seed))
        if workers is not None:
            cfg = replace(cfg, mc=replace(cfg.mc, workers=workers), sim=replace(cfg.sim, workers=workers))
        if out is not None or fmt is not None:
            cfg = replace(cfg, output=OutputConfig(out or cfg.output.dir, fmt or cfg.output.format))
        return cfg


# section -> key -> (type, required)
_SCHEMA = {
    "market": {
        "reserve_native": (float, True), "reserve_target": (float, True), "fee": (float, False),
        "price_vol": (float, False), "depth_vol": (float, False), "gas": (float, False),
        "attacker_gas": (float, False), "mev_enabled": (bool, False), "price_floor": (float, False),
    },
    "mc": {"n_samples": (int, False), "seed": (int, False), "workers": (int, False)},
    "search": {
        "a_lo": (float, False), "a_hi": (float, False), "a_points": (int, False),
        "refine_iters": (int, False), "min_fills": (int, False),
        "w_lo": (float, False), "w_hi": (float, False), "w_points": (int, False),
        "w_refine_iters": (int, False),
    },
    "plan": {"threshold": (float, False), "n_max": (int, False)},
    "sim": {"n_paths": (int, False), "max_blocks": (int, False), "extra_blocks": (int, False)},
    "verify": {
        "w_values": (list, False), "a_values": (list, False), "fill_levels": (list, False),
        "n_paths": (int, False), "n_samples": (int, False), "analytic_mev_enabled": (bool, False),
        "min_paths": (int, False),
    },
    "output": {"dir": (str, False), "format": (str, False)},
}


class _Locator:
    def __init__(self, text: str | None):
        self.lines = text.splitlines() if text else []

    def where(self, section: str, key: str | None = None) -> str:
        current = None
        for no, line in enumerate(self.lines, 1):
            s = line.strip()
            m = re.match(r"^\[([^\]]+)\]", s)
            if m:
                current = m.group(1).strip()
                if key is None and current == section:
                    return f"line {no}: "
                continue
            if key and re.match(rf"^{re.escape(key)}\s*=", s) and current == (section or None):
                return f"line {no}: "
        return ""


def _coerce(value, typ, path, loc):
    if typ is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if typ is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if typ is list and isinstance(value, list) and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return tuple(float(v) for v in value)
    if typ in (bool, str) and isinstance(value, typ):
        return value
    raise ConfigError(f"{loc}{path}: expected {typ.__name__}, got {value!r}")


def parse_config(data: dict, text: str | None = None) -> RunConfig:
    loc = _Locator(text)
    for key in data:
        if key not in _SCHEMA and key != "wealth":
            raise ConfigError(f"{loc.where(key)}{key}: unknown section")
    sections = {}
    for name, schema in _SCHEMA.items():
        raw = data.get(name, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"{loc.where('', name)}{name}: expected a table")
        out = {}
        for key, value in raw.items():
            if key not in schema:
                raise ConfigError(f"{loc.where(name, key)}{name}.{key}: unknown key")
            out[key] = _coerce(value, schema[key][0], f"{name}.{key}", loc.where(name, key))
        for key, (_, required) in schema.items():
            if required and key not in out:
                raise ConfigError(f"{loc.where(name)}{name}.{key}: required key missing")
        sections[name] = out

    def build(section, fn):
        try:
            return fn(**sections[section])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{loc.where(section)}[{section}]: {exc}") from None

    def market(reserve_native, reserve_target, fee=0.0, attacker_gas=0.0, mev_enabled=True, **rest):
        pool = PoolState(reserve_native, reserve_target, fee)
        return MarketModel(pool, mev=MevParams(attacker_gas, mev_enabled), **rest)

    def search(w_lo=None, w_hi=None, w_points=None, w_refine_iters=None, **rest):
        grid = {k: v for k, v in dict(w_lo=w_lo, w_hi=w_hi, w_points=w_points,
                                       refine_iters=w_refine_iters).items() if v is not None}
        s = SearchConfig(**rest)
        if s.a_points < 2:
            raise ValueError("a_points must be >= 2")
        g = WGridConfig(**grid)
        if not 0 < g.w_lo < g.w_hi or g.w_points < 3:
            raise ValueError("w grid needs 0 < w_lo < w_hi and at least 3 points")
        return s, g

    def mc(**kw):
        m = McConfig(**kw)
        if m.n_samples < 1 or m.workers < 1:
            raise ValueError("n_samples and workers must be >= 1")
        return m

    def verify(**kw):
        v = VerifyConfig(**kw)
        if not v.w_values or any(w <= 0 for w in v.w_values):
            raise ValueError("w_values must be positive")
        if v.a_values is not None and any(a <= 0 for a in v.a_values):
            raise ValueError("a_values must be positive")
        if any(not 0 < q < 1 for q in v.fill_levels):
            raise ValueError("fill_levels must lie in (0, 1)")
        return v

    def output(**kw):
        o = OutputConfig(**kw)
        if o.format not in ("json", "csv"):
            raise ValueError(f"format must be json or csv, got {o.format!r}")
        return o

    m = build("market", market)
    mc_cfg = build("mc", mc)
    s, g = build("search", search)
    sim = build("sim", lambda **kw: SimConfig(seed=mc_cfg.seed, workers=mc_cfg.workers, **kw))
    wealth = data.get("wealth", RunConfig.wealth)
    wealth = _coerce(wealth, float, "wealth", loc.where("", "wealth"))
    if not wealth > 0:
        raise ConfigError(f"{loc.where('', 'wealth')}wealth: must be positive")
    return RunConfig(m, mc_cfg, s, g, build("plan", lambda **kw: PlanConfig(**kw)), sim,
                     build("verify", verify), wealth, build("output", output))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        return parse_config(data, None if path.suffix == ".json" else text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def config_to_dict(cfg: RunConfig) -> dict:
    """Inverse of :func:`parse_config` (JSON encoding of the same schema)."""
    m = cfg.market
    d = {
        "wealth": cfg.wealth,
        "market": {
            "reserve_native": m.pool0.reserve_native, "reserve_target": m.pool0.reserve_target,
            "fee": m.pool0.fee, "price_vol": m.price_vol, "depth_vol": m.depth_vol, "gas": m.gas,
            "attacker_gas": m.mev.attacker_gas, "mev_enabled": m.mev.enabled, "price_floor": m.price_floor,
        },
        "mc": {"n_samples": cfg.mc.n_samples, "seed": cfg.mc.seed, "workers": cfg.mc.workers},
        "search": {
            "a_points": cfg.search.a_points, "refine_iters": cfg.search.refine_iters,
            "min_fills": cfg.search.min_fills, "w_lo": cfg.wgrid.w_lo, "w_hi": cfg.wgrid.w_hi,
            "w_points": cfg.wgrid.w_points, "w_refine_iters": cfg.wgrid.refine_iters,
        },
        "plan": {"threshold": cfg.plan.threshold, "n_max": cfg.plan.n_max},
        "sim": {"n_paths": cfg.sim.n_paths, "max_blocks": cfg.sim.max_blocks, "extra_blocks": cfg.sim.extra_blocks},
        "verify": {
            "w_values": list(cfg.verify.w_values), "fill_levels": list(cfg.verify.fill_levels),
            "n_paths": cfg.verify.n_paths, "n_samples": cfg.verify.n_samples, "min_paths": cfg.verify.min_paths,
        },
        "output": {"dir": cfg.output.dir, "format": cfg.output.format},
    }
    for key in ("a_lo", "a_hi"):
        if getattr(cfg.search, key) is not None:
            d["search"][key] = getattr(cfg.search, key)
    if cfg.verify.a_values is not None:
        d["verify"]["a_values"] = list(cfg.verify.a_values)
    if cfg.verify.analytic_mev_enabled is not None:
        d["verify"]["analytic_mev_enabled"] = cfg.verify.analytic_mev_enabled
    return d
