"""Exact arbitrage scheduling: LP relaxation plus branch-and-bound on p_c * p_d = 0."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..model import EssParams, Schedule, ScheduleProblem, make_schedule
from .lp import PIVOT_RULES, solve_lp

# objective difference (EUR) below which two branch-and-bound leaves tie
TIE_TOL = 1e-9


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    NODE_LIMIT = "NodeLimit"


@dataclass(frozen=True)
class SolverOptions:
    feas_tol: float = 1e-9
    comp_tol: float = 1e-6
    relaxed_only: bool = False
    node_limit: int = 100_000
    pivot_rule: str = "bland"

    def __post_init__(self):
        if not self.feas_tol > 0 or not self.comp_tol > 0:
            raise ValueError("tolerances must be positive")
        if self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")
        if self.pivot_rule not in PIVOT_RULES:
            raise ValueError(f"pivot_rule must be one of {PIVOT_RULES}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SolverOptions":
        return cls(**data)


@dataclass(frozen=True)
class SolveOutcome:
    status: SolveStatus
    schedule: Optional[Schedule]
    nodes_explored: int

    @property
    def ok(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


@dataclass(frozen=True)
class _ScheduleLP:
    A: sp.csc_matrix
    lo: np.ndarray
    hi: np.ndarray
    basis: np.ndarray
    n_steps: int


@lru_cache(maxsize=256)
def _structure(params: EssParams, n: int) -> _ScheduleLP:
    # Column layout per step t: p_charge at 3t, p_discharge at 3t+1, soc at 3t+2.
    # Row t: soc_t - rho*soc_{t-1} - dt*eta_c*p_c + dt/eta_d*p_d = rhs_t.
    dt = params.dt_hours
    rows, cols, vals = [], [], []
    for t in range(n):
        rows += [t, t, t]
        cols += [3 * t, 3 * t + 1, 3 * t + 2]
        vals += [-dt * params.eta_c, dt / params.eta_d, 1.0]
        if t > 0:
            rows.append(t)
            cols.append(3 * (t - 1) + 2)
            vals.append(-params.rho)
    A = sp.csc_matrix((vals, (rows, cols)), shape=(n, 3 * n))
    lo = np.tile([0.0, 0.0, params.soc_min], n)
    hi = np.tile([params.p_charge_max, params.p_discharge_max, params.soc_max], n)
    basis = np.arange(n) * 3 + 2
    for arr in (lo, hi, basis):
        arr.setflags(write=False)
    return _ScheduleLP(A, lo, hi, basis, n)


def _objective(problem: ScheduleProblem) -> np.ndarray:
    n = len(problem)
    c = np.zeros(3 * n)
    w = problem.params.dt_hours * problem.prices
    c[0::3] = w
    c[1::3] = -w
    return c


def _rhs(problem: ScheduleProblem) -> np.ndarray:
    b = np.zeros(len(problem))
    b[0] = problem.params.rho * problem.initial_soc
    return b


def _clean(values: np.ndarray, upper: np.ndarray, tol: float) -> np.ndarray:
    out = values.copy()
    out[np.abs(out) <= tol] = 0.0
    near_top = np.abs(out - upper) <= tol
    out[near_top] = upper[near_top]
    return out


def _solve_node(lp, c, b, hi, options):
    res = solve_lp(
        c, lp.A, b, lp.lo, hi, lp.basis,
        feas_tol=options.feas_tol, rule=options.pivot_rule,
    )
    if res.status == "iteration_limit":
        raise RuntimeError("simplex iteration limit reached")
    if res.status != "optimal":
        return None
    snap = 10 * options.feas_tol
    pc = _clean(res.x[0::3], hi[0::3], snap)
    pd = _clean(res.x[1::3], hi[1::3], snap)
    return -res.objective, pc, pd


def _prefer(candidate: Schedule, incumbent: Optional[Schedule]) -> bool:
    """True when ``candidate`` should replace ``incumbent``."""
    if incumbent is None:
        return True
    diff = candidate.objective - incumbent.objective
    if diff > TIE_TOL:
        return True
    if diff < -TIE_TOL:
        return False
    key_c = tuple(np.concatenate([candidate.p_charge, candidate.p_discharge]))
    key_i = tuple(np.concatenate([incumbent.p_charge, incumbent.p_discharge]))
    return key_c < key_i


def solve(problem: ScheduleProblem, options: SolverOptions = SolverOptions()) -> SolveOutcome:
    """Globally optimal schedule for ``problem``.

    The LP relaxation drops ``p_c * p_d = 0``. When a relaxed optimum
    charges and discharges in the same step, branch on the step with the
    largest overlap: first forbid discharging there, then forbid charging.
    The tree is walked depth-first and leaves with equal objective resolve
    to the lexicographically smallest (p_charge, p_discharge) pair.
    """
    lp = _structure(problem.params, len(problem))
    c = _objective(problem)
    b = _rhs(problem)

    if options.relaxed_only:
        node = _solve_node(lp, c, b, lp.hi, options)
        if node is None:
            return SolveOutcome(SolveStatus.INFEASIBLE, None, 1)
        _, pc, pd = node
        return SolveOutcome(SolveStatus.OPTIMAL, make_schedule(pc, pd, problem), 1)

    incumbent: Optional[Schedule] = None
    stack = [np.array(lp.hi)]
    nodes = 0
    while stack:
        if nodes >= options.node_limit:
            return SolveOutcome(SolveStatus.NODE_LIMIT, None, nodes)
        hi = stack.pop()
        nodes += 1
        node = _solve_node(lp, c, b, hi, options)
        if node is None:
            continue
        bound, pc, pd = node
        if incumbent is not None and bound < incumbent.objective - TIE_TOL:
            continue
        overlap = np.minimum(pc, pd)
        k = int(np.argmax(overlap))
        if overlap[k] <= options.comp_tol:
            candidate = make_schedule(pc, pd, problem)
            if _prefer(candidate, incumbent):
                incumbent = candidate
            continue
        discharge_only = hi.copy()
        discharge_only[3 * k] = 0.0
        charge_only = hi.copy()
        charge_only[3 * k + 1] = 0.0
        stack.append(discharge_only)
        stack.append(charge_only)

    if incumbent is None:
        return SolveOutcome(SolveStatus.INFEASIBLE, None, nodes)
    return SolveOutcome(SolveStatus.OPTIMAL, incumbent, nodes)


def restricted_bounds(problem: ScheduleProblem, charge_steps) -> np.ndarray:
    """Upper bounds forcing each step to charge-only (True) or discharge-only (False)."""
    lp = _structure(problem.params, len(problem))
    hi = np.array(lp.hi)
    for t, charging in enumerate(charge_steps):
        if charging:
            hi[3 * t + 1] = 0.0
        else:
            hi[3 * t] = 0.0
    return hi


def solve_restricted(problem: ScheduleProblem, hi: np.ndarray, options: SolverOptions):
    """Solve the LP with the given upper bounds; returns (profit, p_c, p_d) or None."""
    lp = _structure(problem.params, len(problem))
    return _solve_node(lp, _objective(problem), _rhs(problem), hi, options)
