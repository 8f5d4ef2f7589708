"""Full-horizon reference solution and its on-disk format.

A solution is persisted as two files: the trajectory CSV
(``t,price_eur_mwh,p_charge_mw,p_discharge_mw,soc_mwh,cum_profit_eur``) and
a JSON sidecar next to it with the same stem.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import SchemaMismatch, SolverFailure
from .ingest import PriceSeries
from .model import (
    TRAJECTORY_HEADER,
    EssParams,
    Schedule,
    ScheduleProblem,
    cumulative_profit,
    format_trajectory_csv,
)
from .solver import SolverOptions, solve

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class GlobalSolution:
    schedule: Schedule
    cum_profit: np.ndarray
    prices: PriceSeries
    params: EssParams
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        cum = np.asarray(self.cum_profit, dtype=float).copy()
        cum.setflags(write=False)
        object.__setattr__(self, "cum_profit", cum)

    @property
    def objective(self) -> float:
        return self.schedule.objective

    @property
    def net(self) -> np.ndarray:
        return self.schedule.net

    def problem(self) -> ScheduleProblem:
        return ScheduleProblem.from_params(self.params, self.prices.prices)

    def __eq__(self, other):
        if not isinstance(other, GlobalSolution):
            return NotImplemented
        return (
            self.schedule == other.schedule
            and np.array_equal(self.cum_profit, other.cum_profit)
            and self.prices == other.prices
            and self.params == other.params
            and self.options == other.options
        )


def solve_global(
    series: PriceSeries, params: EssParams, options: SolverOptions = SolverOptions()
) -> GlobalSolution:
    """Solve the whole series in one shot. Raises SolverFailure on failure."""
    if params.dt_hours != series.dt_hours:
        raise ValueError(
            f"params.dt_hours={params.dt_hours} but series spacing is {series.dt_hours} h"
        )
    problem = ScheduleProblem.from_params(params, series.prices)
    outcome = solve(problem, options)
    if not outcome.ok:
        raise SolverFailure(outcome.status, "full-horizon problem")
    cum = cumulative_profit(outcome.schedule, problem.prices, params.dt_hours)
    return GlobalSolution(outcome.schedule, cum, series, params, options)


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_solution(sol: GlobalSolution, path) -> None:
    path = Path(path)
    csv_text = format_trajectory_csv(sol.prices.prices, sol.schedule, sol.cum_profit)
    meta = {
        "format_version": FORMAT_VERSION,
        "params": sol.params.to_dict(),
        "objective_eur": sol.objective,
        "solver_options": sol.options.to_dict(),
        "n_steps": len(sol.schedule),
        "series_start": sol.prices.start.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "dt_hours": sol.prices.dt_hours,
    }
    path.write_text(csv_text, encoding="utf-8")
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _parse_trajectory(text: str, n_steps: int) -> np.ndarray:
    if not text.endswith("\n"):
        raise SchemaMismatch("trajectory file is truncated (no final newline)")
    lines = text.split("\n")[:-1]
    if not lines or lines[0] != ",".join(TRAJECTORY_HEADER):
        raise SchemaMismatch("trajectory header mismatch")
    rows = lines[1:]
    if len(rows) != n_steps:
        raise SchemaMismatch(f"expected {n_steps} trajectory rows, found {len(rows)}")
    table = np.empty((n_steps, len(TRAJECTORY_HEADER)))
    for i, line in enumerate(rows):
        fields = line.split(",")
        if len(fields) != len(TRAJECTORY_HEADER):
            raise SchemaMismatch(f"row {i + 1}: expected {len(TRAJECTORY_HEADER)} fields")
        try:
            table[i] = [float(f) for f in fields]
        except ValueError:
            raise SchemaMismatch(f"row {i + 1}: non-numeric field") from None
        if table[i, 0] != i + 1:
            raise SchemaMismatch(f"row {i + 1}: step index {fields[0]} out of order")
    return table


def load_solution(path) -> GlobalSolution:
    path = Path(path)
    meta_text = sidecar_path(path).read_text(encoding="utf-8")
    csv_text = path.read_text(encoding="utf-8")
    try:
        meta = json.loads(meta_text)
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"sidecar is not valid JSON: {exc}") from None
    required = {"format_version", "params", "objective_eur", "solver_options", "n_steps",
                "series_start", "dt_hours"}
    if not isinstance(meta, dict):
        raise SchemaMismatch("sidecar must hold a JSON object")
    if required - set(meta):
        raise SchemaMismatch(f"sidecar missing keys: {sorted(required - set(meta))}")
    if meta["format_version"] != FORMAT_VERSION:
        raise SchemaMismatch(
            f"format_version {meta['format_version']!r} unsupported (expected {FORMAT_VERSION})"
        )
    try:
        params = EssParams.from_dict(meta["params"])
        options = SolverOptions.from_dict(meta["solver_options"])
        start = datetime.fromisoformat(meta["series_start"].replace("Z", "+00:00"))
    except (TypeError, ValueError) as exc:
        raise SchemaMismatch(f"sidecar field invalid: {exc}") from None

    table = _parse_trajectory(csv_text, int(meta["n_steps"]))
    series = PriceSeries.from_values(table[:, 1], start=start, dt_hours=float(meta["dt_hours"]))
    schedule = Schedule(table[:, 2], table[:, 3], table[:, 4], float(meta["objective_eur"]))
    return GlobalSolution(schedule, table[:, 5], series, params, options)
