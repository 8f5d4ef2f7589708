"""Per-horizon performance loss relative to the full-horizon baseline."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .baseline import GlobalSolution
from .errors import InputMismatch
from .rolling import DEFAULT_EPSILON, RollingRun

FORMAT_VERSION = 1


@dataclass(frozen=True)
class HorizonRow:
    T: int
    profit: float
    shortfall_abs: float
    shortfall_pct: Optional[float]  # None when the baseline profit is zero
    avg_soc_dev: float
    mismatch_count: int
    match_pct: float
    n_steps: int
    feasible: bool


@dataclass(frozen=True)
class HorizonReport:
    per_T: tuple[HorizonRow, ...]
    t_star: Optional[int]
    epsilon: float
    global_profit: float

    def row(self, T: int) -> HorizonRow:
        for r in self.per_T:
            if r.T == T:
                return r
        raise KeyError(T)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "t_star": self.t_star,
            "epsilon": self.epsilon,
            "global_profit_eur": self.global_profit,
            "per_T": [asdict(r) for r in self.per_T],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def profit_csv(self) -> str:
        lines = ["T,profit_eur,shortfall_eur,shortfall_pct,avg_soc_dev_mwh,match_pct"]
        for r in self.per_T:
            pct = "" if r.shortfall_pct is None else repr(r.shortfall_pct)
            lines.append(
                f"{r.T},{r.profit!r},{r.shortfall_abs!r},{pct},{r.avg_soc_dev!r},{r.match_pct!r}"
            )
        return "\n".join(lines) + "\n"


def compute_metrics(
    global_sol: GlobalSolution,
    runs: Sequence[tuple[int, RollingRun, Sequence[bool]]],
    epsilon: float = DEFAULT_EPSILON,
) -> HorizonReport:
    """Summarize rolling runs against ``global_sol``.

    Each entry is ``(T, run, match_row)``. Profit and shortfall use the whole
    run, so pass full-length (truncate-at-end) runs when comparing totals.
    SoC deviation and match statistics cover the match row's steps
    ``1 .. T_max - T + 1`` only.
    """
    n = len(global_sol.schedule)
    g_profit = global_sol.objective
    g_soc = global_sol.schedule.soc
    rows = []
    seen = set()
    for T, run, match in sorted(runs, key=lambda item: item[0]):
        if T in seen:
            raise InputMismatch(f"duplicate horizon T={T}")
        seen.add(T)
        match = np.asarray(match, dtype=bool)
        if match.size != n - T + 1:
            raise InputMismatch(
                f"T={T}: match row has {match.size} cells, expected {n - T + 1}"
            )
        if run.n_executed > n or run.horizon_T != T:
            raise InputMismatch(f"T={T}: run does not belong to this baseline")
        k = min(match.size, run.n_executed)
        soc_dev = float(np.mean(np.abs(run.realized.soc[:k] - g_soc[:k]))) if k else 0.0
        shortfall = g_profit - run.profit
        pct = 100.0 * shortfall / abs(g_profit) if g_profit != 0 else None
        matched = int(match.sum())
        rows.append(
            HorizonRow(
                T=int(T),
                profit=float(run.profit),
                shortfall_abs=float(shortfall),
                shortfall_pct=pct,
                avg_soc_dev=soc_dev,
                mismatch_count=int(match.size - matched),
                match_pct=100.0 * matched / match.size,
                n_steps=int(match.size),
                feasible=bool(run.feasible),
            )
        )
    t_star = next((r.T for r in rows if r.mismatch_count == 0), None)
    return HorizonReport(tuple(rows), t_star, float(epsilon), float(g_profit))
