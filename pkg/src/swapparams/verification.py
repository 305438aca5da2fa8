"""Cross-check the reduced objective against the sequential simulator."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .mev import MevParams
from .optimizer import McConfig, objective_estimate
from .sim import SimConfig, simulate_one_shot
from .stochastic import EstimationError, MarketModel, draw_samples

Z_LIMIT = 3.0
MAX_UNFILLED = 1e-3


@dataclass(frozen=True)
class VerifyCell:
    w: float
    a: float
    objective: float | None
    objective_se: float | None
    sim_value: float
    sim_se: float
    z_value: float | None
    inv_f: float | None
    inv_f_se: float | None
    attempts: float
    attempts_se: float
    z_attempts: float | None
    unfilled_mass: float
    passed: bool
    error: str | None = None


def offsets_at_levels(model: MarketModel, w: float, levels, seed: int, n: int = 20_000) -> list[float]:
    """Slippage offsets at given fill probabilities, from a pilot sample."""
    eps = draw_samples(model, w, n, seed).eps
    return [float(f"{q:.6g}") for q in np.quantile(eps, levels)]


def check_cell(model: MarketModel, w: float, a: float, n_samples: int, sim_cfg: SimConfig,
               analytic_mev: MevParams | None = None) -> VerifyCell:
    sim = simulate_one_shot(a, w, model, sim_cfg)
    unfilled = 1.0 - sim.fill_rate
    try:
        value, se, F, _ = objective_estimate(a, w, model, McConfig(n_samples, sim_cfg.seed, sim_cfg.workers),
                                             mev=analytic_mev)
    except EstimationError as exc:
        return VerifyCell(w, a, None, None, sim.mean_value.mean, sim.mean_value.std_error, None, None, None,
                          sim.mean_attempts.mean, sim.mean_attempts.std_error, None, unfilled, False, str(exc))
    z_value = (sim.mean_value.mean - value) / math.hypot(se, sim.mean_value.std_error)
    inv_f, inv_f_se = 1.0 / F.mean, F.std_error / F.mean**2
    att_se = math.hypot(inv_f_se, sim.mean_attempts.std_error)
    z_att = (sim.mean_attempts.mean - inv_f) / att_se if att_se > 0 else (
        0.0 if sim.mean_attempts.mean == inv_f else math.inf)
    passed = abs(z_value) <= Z_LIMIT and abs(z_att) <= Z_LIMIT and unfilled < MAX_UNFILLED
    return VerifyCell(w, a, value, se, sim.mean_value.mean, sim.mean_value.std_error, z_value, inv_f, inv_f_se,
                      sim.mean_attempts.mean, sim.mean_attempts.std_error, z_att, unfilled, passed)


def verify_reduction(model: MarketModel, w_values, n_samples: int, sim_cfg: SimConfig,
                     a_values=None, fill_levels=(0.3, 0.6, 0.9),
                     analytic_mev: MevParams | None = None) -> list[VerifyCell]:
    """Run :func:`check_cell` over a ``w x a`` grid.

    With ``a_values`` omitted each ``w`` gets its own offsets, placed at the
    requested fill probabilities so every cell fills often enough to test.
    """
    cells = []
    for w in w_values:
        offsets = a_values if a_values is not None else offsets_at_levels(model, w, fill_levels, sim_cfg.seed + 1)
        for a in offsets:
            cells.append(check_cell(model, w, a, n_samples, replace(sim_cfg), analytic_mev))
    return cells
