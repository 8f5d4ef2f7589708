"""Reference solvers used to cross-check ``solve``.

``oracle_enumerate`` removes the branch-and-bound logic from the picture by
trying every charge-only / discharge-only pattern. ``oracle_grid_dp`` does
not use the simplex code at all.
"""

from __future__ import annotations

import itertools
from typing import Optional

import numpy as np

from ..errors import HorizonTooLong
from ..model import Schedule, ScheduleProblem, make_schedule
from .core import (
    SolveOutcome,
    SolverOptions,
    SolveStatus,
    _prefer,
    restricted_bounds,
    solve_restricted,
)

MAX_ENUMERATION_STEPS = 12


def oracle_enumerate(
    problem: ScheduleProblem, options: SolverOptions = SolverOptions()
) -> SolveOutcome:
    n = len(problem)
    if n > MAX_ENUMERATION_STEPS:
        raise HorizonTooLong(
            f"enumeration needs 2^{n} LPs; limit is {MAX_ENUMERATION_STEPS} steps"
        )
    best: Optional[Schedule] = None
    count = 0
    for pattern in itertools.product((True, False), repeat=n):
        count += 1
        node = solve_restricted(problem, restricted_bounds(problem, pattern), options)
        if node is None:
            continue
        _, pc, pd = node
        candidate = make_schedule(pc, pd, problem)
        if _prefer(candidate, best):
            best = candidate
    if best is None:
        return SolveOutcome(SolveStatus.INFEASIBLE, None, count)
    return SolveOutcome(SolveStatus.OPTIMAL, best, count)


def _candidate_actions(s, params, charge_levels, discharge_levels):
    """Actions (p_c, p_d) available from SoC ``s`` (vectorized over ``s``).

    Returns (p_c, p_d, next_soc, infeasible_mask), each shaped (len(s), n_actions).
    The grid levels are joined by two state-dependent actions that land
    exactly on the upper and lower SoC bounds.
    """
    s = np.atleast_1d(s)
    dt, rho = params.dt_hours, params.rho
    k = s.size
    fill_up = (params.soc_max - rho * s) / (dt * params.eta_c)
    drain = (rho * s - params.soc_min) * params.eta_d / dt
    pc = np.concatenate(
        [
            np.broadcast_to(charge_levels, (k, charge_levels.size)),
            np.zeros((k, discharge_levels.size)),
            fill_up[:, None],
            np.zeros((k, 1)),
        ],
        axis=1,
    )
    pd = np.concatenate(
        [
            np.zeros((k, charge_levels.size)),
            np.broadcast_to(discharge_levels, (k, discharge_levels.size)),
            np.zeros((k, 1)),
            drain[:, None],
        ],
        axis=1,
    )
    bad = (pc < 0) | (pc > params.p_charge_max) | (pd < 0) | (pd > params.p_discharge_max)
    nxt = rho * s[:, None] + dt * (params.eta_c * pc - pd / params.eta_d)
    bad |= (nxt < params.soc_min - 1e-12) | (nxt > params.soc_max + 1e-12)
    nxt = np.clip(nxt, params.soc_min, params.soc_max)
    return pc, pd, nxt, bad


def oracle_grid_dp(problem: ScheduleProblem, soc_grid: int = 201, power_grid: int = 201) -> float:
    """Profit of a feasible schedule found by backward DP on a SoC grid.

    The value function is tabulated on ``soc_grid`` SoC levels with
    ``power_grid`` charge and discharge levels and linear interpolation.
    A forward pass then replays the greedy policy from the exact initial
    SoC with exact dynamics, so the returned profit belongs to a feasible
    schedule and never exceeds the true optimum.
    """
    if soc_grid < 51 or power_grid < 51:
        raise ValueError("soc_grid and power_grid must be at least 51")
    p = problem.params
    prices = problem.prices
    n = len(problem)
    grid = np.linspace(p.soc_min, p.soc_max, soc_grid)
    charge_levels = np.linspace(0.0, p.p_charge_max, power_grid)
    discharge_levels = np.linspace(0.0, p.p_discharge_max, power_grid)[1:]

    def q_values(s, t, v_next):
        pc, pd, nxt, bad = _candidate_actions(s, p, charge_levels, discharge_levels)
        reward = p.dt_hours * prices[t] * (pd - pc)
        q = reward + np.interp(nxt, grid, v_next)
        q[bad] = -np.inf
        return pc, pd, q

    values = [None] * (n + 1)
    values[n] = np.zeros(soc_grid)
    for t in range(n - 1, -1, -1):
        _, _, q = q_values(grid, t, values[t + 1])
        values[t] = q.max(axis=1)

    s = problem.initial_soc
    total = 0.0
    for t in range(n):
        pc, pd, q = q_values(np.array([s]), t, values[t + 1])
        j = int(np.argmax(q[0]))
        if not np.isfinite(q[0, j]):
            raise RuntimeError("no feasible action on the DP grid")
        a_c, a_d = float(pc[0, j]), float(pd[0, j])
        total += p.dt_hours * prices[t] * (a_d - a_c)
        s = p.rho * s + p.dt_hours * (p.eta_c * a_c - a_d / p.eta_d)
    return float(total)
