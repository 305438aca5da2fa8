"""Command line front end.

    swapparams estimate-f --config ref1.toml --w 1000 --a 0.003 0.004 0.005
    swapparams solve      --config ref1.toml [--wealth W]
    swapparams verify     --config ref1.toml
    swapparams simulate   --config ref1.toml --w 1000 --a 0.004 [--trades N] [--trace trace.csv]

Exit codes: 0 ok, 2 config error, 3 estimation error, 4 no interior optimum,
5 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import typing
from dataclasses import asdict, dataclass, fields, is_dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .mev import MevParams
from .optimizer import NoInteriorOptimum, TradePlan, plan_trades, solve_wstar
from .sim import simulate_plan
from .stochastic import EstimationError, draw_samples, estimate_F
from .verification import VerifyCell, verify_reduction

EXIT_OK, EXIT_CONFIG, EXIT_ESTIMATION, EXIT_NO_INTERIOR, EXIT_VERIFY = 0, 2, 3, 4, 5


@dataclass(frozen=True)
class EstimateFRow:
    a: float
    F: float
    std_error: float


@dataclass(frozen=True)
class EstimateFReport:
    w: float
    n_samples: int
    seed: int
    rows: list[EstimateFRow]


@dataclass(frozen=True)
class Certificate:
    k: float
    value: float
    scaled_value: float
    sigma: float
    passed: bool


@dataclass(frozen=True)
class CurveRow:
    w: float
    a_star: float | None
    value: float | None
    value_per_w: float | None
    error: str | None


@dataclass(frozen=True)
class SolveReport:
    status: str
    seed: int
    wealth: float
    w_star: float | None
    a_star: float | None
    n_trades: int | None
    per_trade_size: float | None
    per_trade_a: float | None
    mode: str | None
    expected_value: float | None
    expected_attempts: float | None
    certificates: list[Certificate]
    local_maxima: list[float]
    boundary: str | None
    diagnosis: str | None
    curve: list[CurveRow]


@dataclass(frozen=True)
class VerifyReport:
    seed: int
    n_paths: int
    n_samples: int
    all_passed: bool
    cells: list[VerifyCell]


@dataclass(frozen=True)
class SimulateReport:
    seed: int
    n_paths: int
    w: float
    a: float
    n_trades: int
    mean_value: float
    mean_value_se: float
    mean_attempts: float
    mean_attempts_se: float
    fill_rate: float
    mean_fill_price: float | None


def report_from_dict(cls, data):
    """Rebuild a report dataclass from its ``asdict`` form."""
    hints = typing.get_type_hints(cls)
    kwargs = {}
    for f in fields(cls):
        value = data[f.name]
        hint = hints[f.name]
        if typing.get_origin(hint) is list:
            (inner,) = typing.get_args(hint)
            if is_dataclass(inner):
                value = [report_from_dict(inner, v) for v in value]
        kwargs[f.name] = value
    return cls(**kwargs)


def _dump(report, path: Path, timestamp: bool) -> str:
    payload = {"generated_at": datetime.now(timezone.utc).isoformat()} if timestamp else {}
    payload.update(asdict(report))
    text = json.dumps(payload, indent=2, allow_nan=False) + "\n"
    path.write_text(text)
    return text


def _table(rows, columns, path: Path, timestamp: bool) -> str:
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated_at={datetime.now(timezone.utc).isoformat()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c])
                         for c in columns])
    path.write_text(buf.getvalue())
    return buf.getvalue()


def _finite(x):
    return None if x is None or x != x or x in (float("inf"), float("-inf")) else x


def cmd_estimate_f(cfg: RunConfig, w: float, a_list, timestamp: bool = True) -> tuple[int, str]:
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    samples = draw_samples(cfg.market, w, cfg.mc.n_samples, cfg.mc.seed, cfg.mc.workers)
    rows = []
    for a in a_list:
        est = estimate_F(samples, a)
        rows.append(EstimateFRow(float(a), est.mean, est.std_error))
    report = EstimateFReport(float(w), cfg.mc.n_samples, cfg.mc.seed, rows)
    text = _dump(report, out / "estimate_f.json", timestamp)
    table = _table([asdict(r) for r in rows], ["a", "F", "std_error"], out / "estimate_f.csv", timestamp)
    return EXIT_OK, text if cfg.output.format == "json" else table


def _curve_rows(curve) -> list[CurveRow]:
    rows = []
    for p in curve:
        s = p.solution
        if s is None:
            rows.append(CurveRow(p.w, None, None, None, p.error))
        else:
            rows.append(CurveRow(p.w, s.a_star, s.value, s.per_unit, None))
    return rows


def cmd_solve(cfg: RunConfig, timestamp: bool = True) -> tuple[int, str]:
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    m = cfg.market
    code = EXIT_OK
    try:
        res = solve_wstar(m, cfg.wgrid, cfg.search, cfg.mc)
    except NoInteriorOptimum as exc:
        report = SolveReport("no-interior-optimum", cfg.mc.seed, cfg.wealth, None, None, None, None, None, None,
                             None, None, [], [], exc.edge, str(exc), _curve_rows(exc.curve))
        code = EXIT_NO_INTERIOR
    else:
        plan = plan_trades(cfg.wealth, m, cfg.plan, cfg.wgrid, cfg.search, cfg.mc, w_star=res.w_star)
        sol = res.solution
        certs = [Certificate(c.k, c.value, c.scaled_value, c.sigma, c.passed) for c in res.certificate]
        report = SolveReport("ok", cfg.mc.seed, cfg.wealth, res.w_star, sol.a_star, plan.n_trades,
                             plan.per_trade_size, plan.per_trade_a, plan.mode, plan.expected_total_value,
                             sol.expected_attempts, certs, res.local_maxima, None, None, _curve_rows(res.curve))
    text = _dump(report, out / "solve.json", timestamp)
    table = _table([asdict(r) for r in report.curve], ["w", "a_star", "value", "value_per_w", "error"],
                   out / "value_curve.csv", timestamp)
    return code, text if cfg.output.format == "json" else table


def cmd_verify(cfg: RunConfig, timestamp: bool = True) -> tuple[int, str]:
    v = cfg.verify
    if v.n_paths < v.min_paths:
        raise ConfigError(f"verify.n_paths={v.n_paths}: insufficient statistical power (need >= {v.min_paths})")
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    analytic = None
    if v.analytic_mev_enabled is not None:
        analytic = MevParams(cfg.market.mev.attacker_gas, v.analytic_mev_enabled)
    sim_cfg = replace(cfg.sim, n_paths=v.n_paths)
    cells = verify_reduction(cfg.market, v.w_values, v.n_samples, sim_cfg, v.a_values, v.fill_levels, analytic)
    cells = [replace(c, **{k: _finite(getattr(c, k)) for k in ("z_value", "z_attempts")}) for c in cells]
    ok = all(c.passed for c in cells)
    report = VerifyReport(cfg.mc.seed, v.n_paths, v.n_samples, ok, cells)
    text = _dump(report, out / "verify.json", timestamp)
    cols = [f.name for f in fields(VerifyCell)]
    table = _table([asdict(c) for c in cells], cols, out / "verify.csv", timestamp)
    return (EXIT_OK if ok else EXIT_VERIFY), text if cfg.output.format == "json" else table


def cmd_simulate(cfg: RunConfig, w: float, a: float, n_trades: int = 1, trace=None,
                 timestamp: bool = True) -> tuple[int, str]:
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    plan = TradePlan(n_trades, w, a, float("nan"), "manual")
    res = simulate_plan(plan, cfg.market, cfg.sim, trace=trace)
    report = SimulateReport(cfg.sim.seed, cfg.sim.n_paths, w, a, n_trades, res.mean_value.mean,
                            res.mean_value.std_error, res.mean_attempts.mean, res.mean_attempts.std_error,
                            res.fill_rate, _finite(res.mean_fill_price.mean))
    text = _dump(report, out / "simulate.json", timestamp)
    table = _table([asdict(report)], [f.name for f in fields(SimulateReport)], out / "simulate.csv", timestamp)
    return EXIT_OK, text if cfg.output.format == "json" else table


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swapparams", description="Optimal slippage tolerance and trade size.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML (or JSON) run configuration")
        p.add_argument("--seed", type=int, help="override mc.seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=["json", "csv"], help="what to print on stdout")
        p.add_argument("--no-timestamp", action="store_true", help="omit the generated_at line")
        p.add_argument("--workers", type=int, help="threads for sampling and simulation")
        return p

    p = common(sub.add_parser("estimate-f", help="tabulate the fill probability F_w(a)"))
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--a", type=float, nargs="+", required=True)

    p = common(sub.add_parser("solve", help="best trade size, slippage offset and plan"))
    p.add_argument("--wealth", type=float)

    p = common(sub.add_parser("verify", help="reduced objective vs full simulation"))
    p.add_argument("--n-paths", type=int)
    p.add_argument("--n-samples", type=int)

    p = common(sub.add_parser("simulate", help="simulate a fixed (w, a) policy"))
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--trades", type=int, default=1)
    p.add_argument("--n-paths", type=int)
    p.add_argument("--trace", help="write a per-block CSV trace of the first paths")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(args.seed, args.workers, args.out, args.format)
        if args.command == "solve" and args.wealth is not None:
            if not args.wealth > 0:
                raise ConfigError("--wealth must be positive")
            cfg = replace(cfg, wealth=args.wealth)
        if args.command in ("verify", "simulate") and args.n_paths is not None:
            if args.command == "verify":
                cfg = replace(cfg, verify=replace(cfg.verify, n_paths=args.n_paths))
            else:
                cfg = replace(cfg, sim=replace(cfg.sim, n_paths=args.n_paths))
        if args.command == "verify" and args.n_samples is not None:
            cfg = replace(cfg, verify=replace(cfg.verify, n_samples=args.n_samples))
        stamp = not args.no_timestamp
        if args.command == "estimate-f":
            code, text = cmd_estimate_f(cfg, args.w, args.a, stamp)
        elif args.command == "solve":
            code, text = cmd_solve(cfg, stamp)
        elif args.command == "verify":
            code, text = cmd_verify(cfg, stamp)
        else:
            code, text = cmd_simulate(cfg, args.w, args.a, args.trades, args.trace, stamp)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EstimationError, ValueError) as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
