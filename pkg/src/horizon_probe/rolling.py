"""Rolling-horizon simulation and minimum forecast horizon detection.

At every step ``t`` the scheduler solves the window ``t .. t+T-1`` starting
from the SoC reached so far, executes only the first action and moves on.
A candidate horizon ``T`` is a forecast horizon when every executed net
injection ``p_discharge - p_charge`` agrees with the full-horizon reference
within ``epsilon`` over the steps ``1 .. T_max - T + 1``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .baseline import GlobalSolution
from .errors import InputMismatch
from .ingest import PriceSeries
from .model import EssParams, Schedule, ScheduleProblem, cumulative_profit, make_schedule, step_soc
from .solver import SolverOptions, solve

log = logging.getLogger(__name__)

WINDOW_MODES = ("fixed", "truncate-at-end")
DEFAULT_EPSILON = 1e-4
DEFAULT_T_RANGE = (2, 88)


@dataclass(frozen=True)
class RollingConfig:
    horizon_T: int
    epsilon: float = DEFAULT_EPSILON
    decision_steps: int = 1
    window_mode: str = "fixed"

    def __post_init__(self):
        if self.horizon_T < 2:
            raise ValueError(f"horizon_T must be >= 2, got {self.horizon_T}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.decision_steps != 1:
            raise ValueError("only a decision horizon of one step is supported")
        if self.window_mode not in WINDOW_MODES:
            raise ValueError(f"window_mode must be one of {WINDOW_MODES}")


@dataclass(frozen=True, eq=False)
class RollingRun:
    horizon_T: int
    window_mode: str
    first_actions: np.ndarray  # executed net injection per step, MW
    realized: Schedule
    profit: float
    feasible: bool

    @property
    def n_executed(self) -> int:
        return len(self.realized)

    def cum_profit(self, prices: Sequence[float], dt_hours: float) -> np.ndarray:
        return cumulative_profit(self.realized, np.asarray(prices)[: self.n_executed], dt_hours)


@dataclass(frozen=True, eq=False)
class MatchMatrix:
    horizons: tuple[int, ...]
    steps: int  # T_max
    cells: tuple[np.ndarray, ...]  # one boolean row per horizon, length T_max - T + 1

    def row(self, T: int) -> np.ndarray:
        return self.cells[self.horizons.index(T)]

    @property
    def match_pct(self) -> np.ndarray:
        return np.array([100.0 * r.sum() / r.size for r in self.cells])

    def full_match(self) -> list[bool]:
        return [bool(r.all()) for r in self.cells]

    def to_csv(self) -> str:
        width = max((r.size for r in self.cells), default=0)
        lines = ["T," + ",".join(f"t{i}" for i in range(1, width + 1))]
        for T, r in zip(self.horizons, self.cells):
            cells = ["1" if v else "0" for v in r] + [""] * (width - r.size)
            lines.append(f"{T}," + ",".join(cells))
        return "\n".join(lines) + "\n"

    def pct_csv(self) -> str:
        lines = ["T,match_pct"]
        lines += [f"{T},{p!r}" for T, p in zip(self.horizons, self.match_pct.tolist())]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class HorizonSearchResult:
    t_star: Optional[int]
    tested_range: tuple[int, int]
    tested: tuple[int, ...]
    per_T_matched: tuple[bool, ...]
    epsilon: float

    def to_dict(self) -> dict:
        return {
            "t_star": self.t_star,
            "tested_range": list(self.tested_range),
            "per_T": [
                {"T": T, "matched": m} for T, m in zip(self.tested, self.per_T_matched)
            ],
            "epsilon": self.epsilon,
        }


def _windows(
    prices: np.ndarray, params: EssParams, T: int, n_steps: int, options: SolverOptions
) -> Iterator[Optional[tuple[float, float]]]:
    """Yield the executed (p_charge, p_discharge) per step, or None on failure."""
    soc = params.soc_init
    n = prices.size
    for t in range(n_steps):
        window = prices[t : min(t + T, n)]
        outcome = solve(ScheduleProblem(params, window, soc), options)
        if not outcome.ok:
            log.info("T=%d: window at t=%d ended %s", T, t + 1, outcome.status.value)
            yield None
            return
        pc = float(outcome.schedule.p_charge[0])
        pd = float(outcome.schedule.p_discharge[0])
        yield pc, pd
        soc = step_soc(soc, pc, pd, params)


def _n_steps(n: int, T: int, mode: str) -> int:
    return n - T + 1 if mode == "fixed" else n


def _run_from_actions(prices, params, T, mode, pcs, pds, feasible) -> RollingRun:
    k = len(pcs)
    if k:
        problem = ScheduleProblem(params, prices[:k], params.soc_init)
        realized = make_schedule(pcs, pds, problem)
    else:
        realized = Schedule(np.zeros(0), np.zeros(0), np.zeros(0), 0.0)
    return RollingRun(T, mode, realized.net, realized, realized.objective, feasible)


def _simulate(prices, params, T, mode, options) -> RollingRun:
    pcs, pds = [], []
    feasible = True
    for action in _windows(prices, params, T, _n_steps(prices.size, T, mode), options):
        if action is None:
            feasible = False
            break
        pcs.append(action[0])
        pds.append(action[1])
    return _run_from_actions(prices, params, T, mode, pcs, pds, feasible)


def simulate_rolling(
    series: PriceSeries,
    params: EssParams,
    config: RollingConfig,
    options: SolverOptions = SolverOptions(),
) -> RollingRun:
    """Roll a ``config.horizon_T``-step window over the series.

    ``fixed`` stops once the window would run past the data
    (``T_max - T + 1`` steps); ``truncate-at-end`` keeps going with shrinking
    windows until every step has been executed.
    """
    prices = series.prices
    if config.horizon_T > prices.size:
        raise ValueError(f"horizon {config.horizon_T} exceeds series length {prices.size}")
    return _simulate(prices, params, config.horizon_T, config.window_mode, options)


def _check_global(series: PriceSeries, params: EssParams, global_sol: GlobalSolution):
    if global_sol.params != params:
        raise InputMismatch("baseline was solved with different storage parameters")
    if global_sol.prices.dt_hours != series.dt_hours or not np.array_equal(
        global_sol.prices.prices, series.prices
    ):
        raise InputMismatch("baseline was solved on a different price series")


def _check_horizons(horizons: Sequence[int], n: int):
    for T in horizons:
        if not 2 <= T <= n:
            raise ValueError(f"horizon {T} outside [2, {n}]")


def _search_one(prices, params, global_net, T, epsilon, options) -> bool:
    n_steps = prices.size - T + 1
    for t, action in enumerate(_windows(prices, params, T, n_steps, options)):
        if action is None:
            return False
        if abs((action[1] - action[0]) - global_net[t]) > epsilon:
            log.debug("T=%d: first mismatch at t=%d", T, t + 1)
            return False
    return True


def _match_row(prices, params, global_net, T, epsilon, options):
    run = _simulate(prices, params, T, "truncate-at-end", options)
    n_cells = prices.size - T + 1
    row = np.zeros(n_cells, dtype=bool)
    k = min(n_cells, run.first_actions.size)
    row[:k] = np.abs(run.first_actions[:k] - global_net[:k]) <= epsilon
    return row, run


def find_min_horizon(
    series: PriceSeries,
    params: EssParams,
    global_sol: GlobalSolution,
    T_range: tuple[int, int] = DEFAULT_T_RANGE,
    epsilon: float = DEFAULT_EPSILON,
    options: SolverOptions = SolverOptions(),
    workers: int = 1,
) -> HorizonSearchResult:
    """Smallest ``T`` in ``T_range`` whose rolling actions all match the baseline.

    Each candidate stops at its first mismatch or infeasible window. With
    ``workers > 1`` candidates are evaluated in ascending batches; the
    answer does not depend on the worker count.
    """
    _check_global(series, params, global_sol)
    lo, hi = T_range
    horizons = list(range(lo, hi + 1))
    _check_horizons(horizons, len(series))
    prices = series.prices
    net = global_sol.net
    tested: list[int] = []
    matched: list[bool] = []

    if workers <= 1:
        for T in horizons:
            ok = _search_one(prices, params, net, T, epsilon, options)
            tested.append(T)
            matched.append(ok)
            log.info("T=%d matched=%s", T, ok)
            if ok:
                break
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for start in range(0, len(horizons), workers):
                batch = horizons[start : start + workers]
                results = list(
                    pool.map(
                        _search_one,
                        [prices] * len(batch),
                        [params] * len(batch),
                        [net] * len(batch),
                        batch,
                        [epsilon] * len(batch),
                        [options] * len(batch),
                    )
                )
                for T, ok in zip(batch, results):
                    tested.append(T)
                    matched.append(ok)
                    if ok:
                        break
                if matched and matched[-1]:
                    break

    t_star = tested[-1] if matched and matched[-1] else None
    return HorizonSearchResult(t_star, (lo, hi), tuple(tested), tuple(matched), epsilon)


def sweep(
    series: PriceSeries,
    params: EssParams,
    global_sol: GlobalSolution,
    horizons: Sequence[int],
    epsilon: float = DEFAULT_EPSILON,
    options: SolverOptions = SolverOptions(),
    workers: int = 1,
) -> tuple[MatchMatrix, dict[int, RollingRun]]:
    """Match matrix plus the full-length (truncate-at-end) run for each horizon.

    A mismatching step is recorded and the rolling action is executed
    anyway, so later cells reflect the rolling trajectory rather than the
    baseline's. Cells after an infeasible window are False.
    """
    _check_global(series, params, global_sol)
    horizons = sorted(set(int(T) for T in horizons))
    _check_horizons(horizons, len(series))
    prices = series.prices
    net = global_sol.net
    args = (
        [prices] * len(horizons),
        [params] * len(horizons),
        [net] * len(horizons),
        horizons,
        [epsilon] * len(horizons),
        [options] * len(horizons),
    )
    if workers <= 1:
        results = list(map(_match_row, *args))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_match_row, *args))
    rows = tuple(r for r, _ in results)
    runs = {T: run for T, (_, run) in zip(horizons, results)}
    return MatchMatrix(tuple(horizons), len(series), rows), runs


def match_matrix(
    series: PriceSeries,
    params: EssParams,
    global_sol: GlobalSolution,
    horizons: Sequence[int],
    epsilon: float = DEFAULT_EPSILON,
    options: SolverOptions = SolverOptions(),
    workers: int = 1,
) -> MatchMatrix:
    return sweep(series, params, global_sol, horizons, epsilon, options, workers)[0]
