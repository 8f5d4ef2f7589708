"""Command-line entry point: ``horizon-probe <command> --config cfg.json``.

Exit status: 0 success, 1 usage or config error, 2 price data error,
3 solver failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema

from . import __version__
from .baseline import GlobalSolution, save_solution, solve_global
from .errors import ConfigError, DataError, HorizonProbeError, InvalidParams, SolverFailure
from .ingest import SYNTHETIC_KINDS, PriceSeries, generate_synthetic, load_price_csv
from .metrics import compute_metrics
from .model import EssParams, format_trajectory_csv
from .rolling import (
    DEFAULT_EPSILON,
    DEFAULT_T_RANGE,
    WINDOW_MODES,
    RollingConfig,
    find_min_horizon,
    simulate_rolling,
    sweep,
)
from .solver import SolverOptions
from .solver.lp import PIVOT_RULES

log = logging.getLogger("horizon_probe")

COMMANDS = ("global", "rolling", "find-horizon", "sweep", "report")
DEFAULT_PROFIT_HORIZONS = (4, 8, 12, 16, 20, 24, 28, 32, 36, 48, 60)
RUN_LOG = "run_log.jsonl"

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3

_num = {"type": "number"}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "price_csv_path": {"type": "string"},
        "synthetic": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "length"],
            "properties": {
                "kind": {"enum": list(SYNTHETIC_KINDS)},
                "length": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer"},
            },
        },
        "ess": {
            "type": "object",
            "additionalProperties": False,
            "properties": {name: _num for name in EssParams.__dataclass_fields__},
        },
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "t_range": {
            "type": "array",
            "items": {"type": "integer", "minimum": 2},
            "minItems": 2,
            "maxItems": 2,
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "feas_tol": {"type": "number", "exclusiveMinimum": 0},
                "comp_tol": {"type": "number", "exclusiveMinimum": 0},
                "relaxed_only": {"type": "boolean"},
                "node_limit": {"type": "integer", "minimum": 1},
                "pivot_rule": {"enum": list(PIVOT_RULES)},
            },
        },
        "output_dir": {"type": "string"},
        "parallelism": {"type": "integer", "minimum": 1},
        "window_mode": {"enum": list(WINDOW_MODES)},
        "profit_horizons": {"type": "array", "items": {"type": "integer", "minimum": 2}},
    },
    "oneOf": [{"required": ["price_csv_path"]}, {"required": ["synthetic"]}],
}


@dataclass
class ExperimentConfig:
    ess: EssParams
    epsilon: float = DEFAULT_EPSILON
    t_range: tuple[int, int] = DEFAULT_T_RANGE
    solver: SolverOptions = field(default_factory=SolverOptions)
    output_dir: Path = Path("out")
    parallelism: int = 1
    price_csv_path: Optional[Path] = None
    synthetic: Optional[dict] = None
    window_mode: str = "truncate-at-end"
    profit_horizons: tuple[int, ...] = DEFAULT_PROFIT_HORIZONS
    digest: str = ""

    def load_series(self) -> PriceSeries:
        if self.price_csv_path is not None:
            try:
                return load_price_csv(self.price_csv_path)
            except FileNotFoundError:
                raise DataError(f"price file not found: {self.price_csv_path}") from None
            except DataError as exc:
                raise DataError(f"{self.price_csv_path}: {exc}") from exc
        syn = self.synthetic
        return generate_synthetic(syn["kind"], syn["length"], syn.get("seed", 0))


def load_config(path, out_override=None, seed_override=None, parallel_override=None):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(f"{path}: at {err.json_path}: {err.message}")

    base = path.parent
    try:
        ess = EssParams.from_dict(data.get("ess", {}))
        solver = SolverOptions.from_dict(data.get("solver", {}))
    except (InvalidParams, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    t_range = tuple(data.get("t_range", DEFAULT_T_RANGE))
    if t_range[0] > t_range[1]:
        raise ConfigError(f"{path}: t_range lower end exceeds upper end")

    synthetic = data.get("synthetic")
    if seed_override is not None:
        if synthetic is None:
            raise ConfigError("--seed only applies to configs with synthetic prices")
        synthetic = dict(synthetic, seed=seed_override)

    digest_src = dict(data)
    if synthetic is not None:
        digest_src["synthetic"] = synthetic
    digest = hashlib.sha256(
        json.dumps(digest_src, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()

    out_dir = Path(out_override) if out_override else base / data.get("output_dir", "out")
    price_path = data.get("price_csv_path")
    return ExperimentConfig(
        ess=ess,
        epsilon=float(data.get("epsilon", DEFAULT_EPSILON)),
        t_range=(int(t_range[0]), int(t_range[1])),
        solver=solver,
        output_dir=out_dir,
        parallelism=int(parallel_override or data.get("parallelism", 1)),
        price_csv_path=(base / price_path) if price_path else None,
        synthetic=synthetic,
        window_mode=data.get("window_mode", "truncate-at-end"),
        profit_horizons=tuple(data.get("profit_horizons", DEFAULT_PROFIT_HORIZONS)),
        digest=digest,
    )


class _Outputs:
    """Writes artifacts into the output directory and keeps the run log."""

    def __init__(self, cfg: ExperimentConfig, command: str):
        self.dir = cfg.output_dir
        self.dir.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.command = command
        self.written: list[str] = []

    def text(self, name: str, content: str):
        (self.dir / name).write_text(content, encoding="utf-8")
        self.written.append(name)

    def json(self, name: str, obj):
        self.text(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def solution(self, name: str, sol: GlobalSolution):
        save_solution(sol, self.dir / name)
        self.written += [name, str(Path(name).with_suffix(".json"))]

    def close(self):
        if not self.written:
            return
        log_path = self.dir / RUN_LOG
        entries = {}
        if log_path.exists():
            for line in log_path.read_text(encoding="utf-8").splitlines():
                try:
                    rec = json.loads(line)
                    entries[rec["file"]] = rec
                except (json.JSONDecodeError, KeyError, TypeError):
                    continue
        for name in self.written:
            data = (self.dir / name).read_bytes()
            entries[name] = {
                "file": name,
                "sha256": hashlib.sha256(data).hexdigest(),
                "command": self.command,
                "config_sha256": self.cfg.digest,
                "version": __version__,
            }
        lines = [json.dumps(entries[k], sort_keys=True) for k in sorted(entries)]
        log_path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _check_range(cfg: ExperimentConfig, n: int):
    lo, hi = cfg.t_range
    if hi > n:
        raise ConfigError(f"t_range upper end {hi} exceeds series length {n}")


def _rolling_csv(series: PriceSeries, run, dt_hours: float) -> str:
    prices = series.prices
    cum = run.cum_profit(prices, dt_hours)
    return format_trajectory_csv(prices, run.realized, cum)


def _cmd_global(cfg, series, out, args):
    sol = solve_global(series, cfg.ess, cfg.solver)
    out.solution("global_trajectory.csv", sol)
    print(f"objective = {sol.objective!r} EUR")
    return sol


def _cmd_rolling(cfg, series, out, args):
    if args.T is None:
        raise ConfigError("rolling requires --T <k>")
    if not 2 <= args.T <= len(series):
        raise ConfigError(f"--T must lie in [2, {len(series)}]")
    run = simulate_rolling(
        series, cfg.ess, RollingConfig(args.T, cfg.epsilon, window_mode=cfg.window_mode), cfg.solver
    )
    out.text(f"rolling_T{args.T}.csv", _rolling_csv(series, run, cfg.ess.dt_hours))
    out.json(
        f"rolling_T{args.T}.json",
        {
            "T": args.T,
            "window_mode": run.window_mode,
            "profit_eur": run.profit,
            "feasible": run.feasible,
            "n_executed": run.n_executed,
            "format_version": 1,
        },
    )
    note = "" if run.feasible else " (stopped at an infeasible window)"
    print(f"profit = {run.profit!r} EUR over {run.n_executed} steps{note}")


def _cmd_find(cfg, series, out, args):
    _check_range(cfg, len(series))
    sol = solve_global(series, cfg.ess, cfg.solver)
    res = find_min_horizon(
        series, cfg.ess, sol, cfg.t_range, cfg.epsilon, cfg.solver, cfg.parallelism
    )
    out.json("horizon_search.json", dict(res.to_dict(), format_version=1))
    if res.t_star is None:
        print(f"no forecast horizon found up to {cfg.t_range[1]}")
    else:
        print(f"T* = {res.t_star}")


def _sweep(cfg, series, out):
    _check_range(cfg, len(series))
    sol = solve_global(series, cfg.ess, cfg.solver)
    horizons = list(range(cfg.t_range[0], cfg.t_range[1] + 1))
    matrix, runs = sweep(series, cfg.ess, sol, horizons, cfg.epsilon, cfg.solver, cfg.parallelism)
    report = compute_metrics(
        sol, [(T, runs[T], matrix.row(T)) for T in matrix.horizons], cfg.epsilon
    )
    out.text("match_matrix.csv", matrix.to_csv())
    out.text("match_pct.csv", matrix.pct_csv())
    out.text("profit_by_T.csv", report.profit_csv())
    return sol, matrix, runs, report


def _cmd_sweep(cfg, series, out, args):
    _, _, _, report = _sweep(cfg, series, out)
    if report.t_star is None:
        print(f"no forecast horizon found up to {cfg.t_range[1]}")
    else:
        print(f"T* = {report.t_star}")


def _cmd_report(cfg, series, out, args):
    sol, matrix, runs, report = _sweep(cfg, series, out)
    out.solution("global_trajectory.csv", sol)
    out.json("summary.json", report.to_dict())

    lines = ["t,timestamp,price_eur_mwh"]
    for i, p in enumerate(series.points, start=1):
        lines.append(f"{i},{p.timestamp.strftime('%Y-%m-%dT%H:%M:%SZ')},{p.price!r}")
    out.text("prices.csv", "\n".join(lines) + "\n")

    dt = cfg.ess.dt_hours
    prices = series.prices
    focus = report.t_star if report.t_star is not None else matrix.horizons[-1]
    run = runs[focus]
    r_cum = run.cum_profit(prices, dt)
    lines = [
        "t,global_soc_mwh,rolling_soc_mwh,global_net_mw,rolling_net_mw,"
        "global_cum_profit_eur,rolling_cum_profit_eur"
    ]
    for i in range(len(series)):
        if i < run.n_executed:
            rs = [repr(float(v)) for v in (run.realized.soc[i], run.first_actions[i], r_cum[i])]
        else:
            rs = ["", "", ""]
        lines.append(
            f"{i + 1},{float(sol.schedule.soc[i])!r},{rs[0]},{float(sol.net[i])!r},{rs[1]},"
            f"{float(sol.cum_profit[i])!r},{rs[2]}"
        )
    out.text(f"rolling_vs_global_T{focus}.csv", "\n".join(lines) + "\n")

    chosen = [T for T in cfg.profit_horizons if T in runs]
    cums = {T: runs[T].cum_profit(prices, dt) for T in chosen}
    lines = ["t,global," + ",".join(f"T{T}" for T in chosen)]
    for i in range(len(series)):
        vals = [repr(float(sol.cum_profit[i]))]
        for T in chosen:
            c = cums[T]
            vals.append(repr(float(c[i])) if i < c.size else "")
        lines.append(f"{i + 1}," + ",".join(vals))
    out.text("cum_profit_by_T.csv", "\n".join(lines) + "\n")
    print(f"report written to {cfg.output_dir}")
    if report.t_star is None:
        print(f"no forecast horizon found up to {cfg.t_range[1]}")
    else:
        print(f"T* = {report.t_star}")


_HANDLERS = {
    "global": _cmd_global,
    "rolling": _cmd_rolling,
    "find-horizon": _cmd_find,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="horizon-probe", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="experiment config (JSON)")
    parser.add_argument("--T", type=int, help="planning horizon for 'rolling'")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--parallel", type=int, help="worker processes across horizons")
    parser.add_argument("--seed", type=int, help="seed for synthetic price configs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def _setup_logging():
    level = os.environ.get("HORIZON_PROBE_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        level=levels.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    if args.parallel is not None and args.parallel < 1:
        print("horizon-probe: error: --parallel must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config, args.out, args.seed, args.parallel)
        series = cfg.load_series()
        if series.dt_hours != cfg.ess.dt_hours:
            raise ConfigError(
                f"ess.dt_hours={cfg.ess.dt_hours} but the price series is spaced "
                f"{series.dt_hours} h"
            )
        out = _Outputs(cfg, args.command)
        try:
            _HANDLERS[args.command](cfg, series, out, args)
        finally:
            out.close()
    except ConfigError as exc:
        print(f"horizon-probe: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"horizon-probe: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverFailure as exc:
        print(f"horizon-probe: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except HorizonProbeError as exc:
        print(f"horizon-probe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
