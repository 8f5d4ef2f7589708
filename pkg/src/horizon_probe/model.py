"""Storage model: parameters, trajectories, SoC dynamics and feasibility checks."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParams, LengthMismatch

DEFAULT_TOL = 1e-6
# slack allowed on a propagated initial SoC that drifted past a bound by rounding
SOC_BOUND_SLACK = 1e-7

TRAJECTORY_HEADER = (
    "t",
    "price_eur_mwh",
    "p_charge_mw",
    "p_discharge_mw",
    "soc_mwh",
    "cum_profit_eur",
)


@dataclass(frozen=True)
class EssParams:
    """Storage parameters. Defaults are the 1 MW / 10 MWh reference unit."""

    p_charge_max: float = 1.0
    p_discharge_max: float = 1.0
    eta_c: float = 0.85
    eta_d: float = 0.85
    rho: float = 0.99
    soc_min: float = 0.0
    soc_max: float = 10.0
    soc_init: float = 5.0
    dt_hours: float = 1.0

    def __post_init__(self):
        for name in ("eta_c", "eta_d", "rho"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise InvalidParams(f"{name} must lie in (0, 1], got {v}")
        if not 0.0 <= self.soc_min <= self.soc_init <= self.soc_max:
            raise InvalidParams(
                "need 0 <= soc_min <= soc_init <= soc_max, got "
                f"{self.soc_min}, {self.soc_init}, {self.soc_max}"
            )
        if not self.p_charge_max > 0 or not self.p_discharge_max > 0:
            raise InvalidParams("power limits must be positive")
        if not self.dt_hours > 0:
            raise InvalidParams("dt_hours must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EssParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidParams(f"unknown parameter(s): {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class ScheduleProblem:
    params: EssParams
    prices: np.ndarray
    initial_soc: float

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float).copy()
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        if prices.ndim != 1 or prices.size < 1:
            raise InvalidParams("problem needs at least one price")
        if not np.all(np.isfinite(prices)):
            raise InvalidParams("prices must be finite")
        p = self.params
        if not (
            p.soc_min - SOC_BOUND_SLACK
            <= self.initial_soc
            <= p.soc_max + SOC_BOUND_SLACK
        ):
            raise InvalidParams(
                f"initial_soc {self.initial_soc} outside [{p.soc_min}, {p.soc_max}]"
            )

    @classmethod
    def from_params(cls, params: EssParams, prices: Sequence[float]) -> "ScheduleProblem":
        return cls(params, np.asarray(prices, dtype=float), params.soc_init)

    def __len__(self) -> int:
        return self.prices.size


@dataclass(frozen=True, eq=False)
class Schedule:
    p_charge: np.ndarray
    p_discharge: np.ndarray
    soc: np.ndarray
    objective: float

    def __post_init__(self):
        for name in ("p_charge", "p_discharge", "soc"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.p_charge.size
        if self.p_discharge.size != n or self.soc.size != n:
            raise LengthMismatch("p_charge, p_discharge and soc lengths differ")

    def __len__(self) -> int:
        return self.p_charge.size

    @property
    def net(self) -> np.ndarray:
        """Net injection p_discharge - p_charge per step (MW)."""
        return self.p_discharge - self.p_charge

    def __eq__(self, other):
        if not isinstance(other, Schedule):
            return NotImplemented
        return (
            np.array_equal(self.p_charge, other.p_charge)
            and np.array_equal(self.p_discharge, other.p_discharge)
            and np.array_equal(self.soc, other.soc)
            and self.objective == other.objective
        )


class ViolationKind(enum.Enum):
    SOC_BELOW_MIN = "SocBelowMin"
    SOC_ABOVE_MAX = "SocAboveMax"
    CHARGE_OVER_CAP = "ChargeOverCap"
    DISCHARGE_OVER_CAP = "DischargeOverCap"
    NEGATIVE_POWER = "NegativePower"
    DYNAMICS_MISMATCH = "DynamicsMismatch"
    SIMULTANEITY = "Simultaneity"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    step: int  # 1-based
    magnitude: float


def step_soc(s_prev: float, p_c: float, p_d: float, params: EssParams) -> float:
    """Advance the state of charge by one step. No clamping is applied."""
    return params.rho * s_prev + params.dt_hours * (
        params.eta_c * p_c - p_d / params.eta_d
    )


def simulate_soc(
    initial_soc: float, p_charge: Sequence[float], p_discharge: Sequence[float], params: EssParams
) -> np.ndarray:
    soc = np.empty(len(p_charge))
    s = initial_soc
    for i, (pc, pd) in enumerate(zip(p_charge, p_discharge)):
        s = step_soc(s, float(pc), float(pd), params)
        soc[i] = s
    return soc


def step_profits(
    p_charge: Sequence[float], p_discharge: Sequence[float], prices: Sequence[float], dt_hours: float
) -> np.ndarray:
    prices = np.asarray(prices, dtype=float)
    pc = np.asarray(p_charge, dtype=float)
    pd = np.asarray(p_discharge, dtype=float)
    if not (prices.size == pc.size == pd.size):
        raise LengthMismatch(
            f"prices ({prices.size}) and actions ({pc.size}, {pd.size}) differ in length"
        )
    return dt_hours * prices * (pd - pc)


def profit(schedule: Schedule, prices: Sequence[float], dt_hours: float) -> float:
    """Arbitrage revenue sum(dt * price * (p_discharge - p_charge)) in EUR."""
    per_step = step_profits(schedule.p_charge, schedule.p_discharge, prices, dt_hours)
    # sequential sum so that cumulative profit's last entry matches bit for bit
    return float(np.cumsum(per_step)[-1]) if per_step.size else 0.0


def make_schedule(
    p_charge: Sequence[float],
    p_discharge: Sequence[float],
    problem: ScheduleProblem,
) -> Schedule:
    """Build a Schedule from actions, deriving SoC and objective exactly."""
    params = problem.params
    soc = simulate_soc(problem.initial_soc, p_charge, p_discharge, params)
    per_step = step_profits(p_charge, p_discharge, problem.prices, params.dt_hours)
    obj = float(np.cumsum(per_step)[-1]) if per_step.size else 0.0
    return Schedule(np.asarray(p_charge, float), np.asarray(p_discharge, float), soc, obj)


def validate_schedule(
    schedule: Schedule, problem: ScheduleProblem, tol: float = DEFAULT_TOL
) -> list[Violation]:
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = len(problem)
    if len(schedule) != n:
        raise LengthMismatch(f"schedule has {len(schedule)} steps, problem has {n}")
    p = problem.params
    out: list[Violation] = []
    s_prev = problem.initial_soc
    for i in range(n):
        t = i + 1
        pc = float(schedule.p_charge[i])
        pd = float(schedule.p_discharge[i])
        s = float(schedule.soc[i])
        if s < p.soc_min - tol:
            out.append(Violation(ViolationKind.SOC_BELOW_MIN, t, p.soc_min - s))
        if s > p.soc_max + tol:
            out.append(Violation(ViolationKind.SOC_ABOVE_MAX, t, s - p.soc_max))
        if pc > p.p_charge_max + tol:
            out.append(Violation(ViolationKind.CHARGE_OVER_CAP, t, pc - p.p_charge_max))
        if pd > p.p_discharge_max + tol:
            out.append(Violation(ViolationKind.DISCHARGE_OVER_CAP, t, pd - p.p_discharge_max))
        neg = -min(pc, pd)
        if neg > tol:
            out.append(Violation(ViolationKind.NEGATIVE_POWER, t, neg))
        gap = abs(s - step_soc(s_prev, pc, pd, p))
        if gap > tol:
            out.append(Violation(ViolationKind.DYNAMICS_MISMATCH, t, gap))
        both = min(pc, pd)
        if both > tol:
            out.append(Violation(ViolationKind.SIMULTANEITY, t, both))
        s_prev = s
    return out


def format_trajectory_csv(
    prices: Sequence[float], schedule: Schedule, cum_profit: Sequence[float]
) -> str:
    lines = [",".join(TRAJECTORY_HEADER)]
    for i in range(len(schedule)):
        lines.append(
            f"{i + 1},{float(prices[i])!r},{float(schedule.p_charge[i])!r},"
            f"{float(schedule.p_discharge[i])!r},{float(schedule.soc[i])!r},"
            f"{float(cum_profit[i])!r}"
        )
    return "\n".join(lines) + "\n"


def cumulative_profit(schedule: Schedule, prices: Sequence[float], dt_hours: float) -> np.ndarray:
    return np.cumsum(step_profits(schedule.p_charge, schedule.p_discharge, prices, dt_hours))
