import json

import numpy as np
import pytest

from horizon_probe.baseline import (
    FORMAT_VERSION,
    load_solution,
    save_solution,
    sidecar_path,
    solve_global,
)
from horizon_probe.errors import SchemaMismatch, SolverFailure
from horizon_probe.ingest import PriceSeries, generate_synthetic
from horizon_probe.model import EssParams, validate_schedule


def test_two_step_cumulative_profit(params):
    sol = solve_global(PriceSeries.from_values([10.0, 50.0]), params)
    assert sol.objective == pytest.approx(60.0)
    assert sol.cum_profit.tolist() == pytest.approx([10.0, 60.0])
    assert sol.cum_profit[-1] == sol.objective


def test_constant_price_discharges_greedily(params):
    sol = solve_global(generate_synthetic("constant", 12, 0), params)
    s = sol.schedule
    assert s.p_charge.max() == 0.0
    assert s.p_discharge[:4].tolist() == pytest.approx([1.0] * 4)
    assert s.p_discharge[4] > 0
    assert s.p_discharge[5:].max() == pytest.approx(0.0, abs=1e-9)
    assert s.soc[4] == pytest.approx(0.0, abs=1e-9)
    assert validate_schedule(s, sol.problem()) == []


def test_solver_failure_raised():
    p = EssParams(soc_min=9.5, rho=0.5, soc_init=10.0)
    with pytest.raises(SolverFailure):
        solve_global(PriceSeries.from_values([1.0, 2.0]), p)


def test_dt_mismatch(params):
    with pytest.raises(ValueError):
        solve_global(PriceSeries.from_values([1.0, 2.0], dt_hours=2.0), params)


@pytest.fixture
def saved(tmp_path, params):
    sol = solve_global(generate_synthetic("spiky-random", 30, 2), params)
    path = tmp_path / "global.csv"
    save_solution(sol, path)
    return sol, path


def test_round_trip_is_exact(saved):
    sol, path = saved
    again = load_solution(path)
    assert again == sol
    assert again.schedule.soc.tobytes() == sol.schedule.soc.tobytes()


def test_sidecar_contents(saved):
    _, path = saved
    meta = json.loads(sidecar_path(path).read_text())
    assert meta["format_version"] == FORMAT_VERSION
    assert set(meta) >= {"params", "objective_eur", "solver_options"}


def test_truncated_file_rejected(saved):
    _, path = saved
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(SchemaMismatch):
        load_solution(path)


def test_missing_row_rejected(saved):
    _, path = saved
    lines = path.read_text().splitlines(keepends=True)
    path.write_text("".join(lines[:-1]))
    with pytest.raises(SchemaMismatch):
        load_solution(path)


def test_wrong_version_rejected(saved):
    _, path = saved
    side = sidecar_path(path)
    meta = json.loads(side.read_text())
    meta["format_version"] = FORMAT_VERSION + 1
    side.write_text(json.dumps(meta))
    with pytest.raises(SchemaMismatch):
        load_solution(path)


def test_bad_header_rejected(saved):
    _, path = saved
    text = path.read_text()
    path.write_text("step" + text[1:])
    with pytest.raises(SchemaMismatch):
        load_solution(path)


def test_non_numeric_field_rejected(saved):
    _, path = saved
    lines = path.read_text().splitlines()
    fields = lines[3].split(",")
    fields[2] = "x"
    lines[3] = ",".join(fields)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaMismatch):
        load_solution(path)


def test_missing_sidecar_key_rejected(saved):
    _, path = saved
    side = sidecar_path(path)
    meta = json.loads(side.read_text())
    del meta["params"]
    side.write_text(json.dumps(meta))
    with pytest.raises(SchemaMismatch):
        load_solution(path)


def test_cumulative_profit_ends_at_objective(params):
    series = PriceSeries.from_values(np.linspace(-20, 80, 20))
    sol = solve_global(series, params)
    assert sol.cum_profit[-1] == sol.objective
