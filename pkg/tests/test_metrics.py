import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horizon_probe.baseline import solve_global
from horizon_probe.errors import InputMismatch
from horizon_probe.ingest import PriceSeries, generate_synthetic
from horizon_probe.metrics import compute_metrics
from horizon_probe.model import EssParams
from horizon_probe.rolling import RollingConfig, simulate_rolling, sweep

P = EssParams()


def test_identity_run_has_no_loss():
    series = generate_synthetic("spiky-random", 30, 2)
    sol = solve_global(series, P)
    run = simulate_rolling(series, P, RollingConfig(30, window_mode="truncate-at-end"))
    report = compute_metrics(sol, [(30, run, [True])])
    row = report.row(30)
    assert row.shortfall_abs == pytest.approx(0.0, abs=1e-6)
    assert row.shortfall_pct == pytest.approx(0.0, abs=1e-6)
    assert row.avg_soc_dev == pytest.approx(0.0, abs=1e-9)
    assert row.mismatch_count == 0
    assert row.match_pct == 100.0
    assert report.t_star == 30


def test_rows_sorted_and_t_star_first_full_match():
    series = generate_synthetic("spiky-random", 40, 6)
    sol = solve_global(series, P)
    matrix, runs = sweep(series, P, sol, range(2, 25))
    items = [(T, runs[T], matrix.row(T)) for T in reversed(matrix.horizons)]
    report = compute_metrics(sol, items)
    assert [r.T for r in report.per_T] == list(range(2, 25))
    full = [T for T, ok in zip(matrix.horizons, matrix.full_match()) if ok]
    assert report.t_star == (full[0] if full else None)
    for r in report.per_T:
        assert r.shortfall_abs >= -1e-6
        assert r.mismatch_count + round(r.match_pct * r.n_steps / 100) == r.n_steps


def test_zero_baseline_profit_gives_no_percentage():
    series = PriceSeries.from_values([50.0] * 6)
    p = EssParams(soc_init=0.0)
    sol = solve_global(series, p)
    run = simulate_rolling(series, p, RollingConfig(3, window_mode="truncate-at-end"))
    row = compute_metrics(sol, [(3, run, [True] * 4)]).row(3)
    assert row.shortfall_pct is None
    assert ",," in compute_metrics(sol, [(3, run, [True] * 4)]).profit_csv()


def test_input_checks():
    series = generate_synthetic("sinusoid", 12, 0)
    sol = solve_global(series, P)
    run = simulate_rolling(series, P, RollingConfig(3, window_mode="truncate-at-end"))
    with pytest.raises(InputMismatch):
        compute_metrics(sol, [(3, run, [True] * 10), (3, run, [True] * 10)])
    with pytest.raises(InputMismatch):
        compute_metrics(sol, [(3, run, [True] * 4)])
    with pytest.raises(InputMismatch):
        compute_metrics(sol, [(4, run, [True] * 9)])


def test_json_is_stable():
    series = generate_synthetic("sinusoid", 12, 0)
    sol = solve_global(series, P)
    run = simulate_rolling(series, P, RollingConfig(3, window_mode="truncate-at-end"))
    a = compute_metrics(sol, [(3, run, [True] * 10)]).to_json()
    b = compute_metrics(sol, [(3, run, [True] * 10)]).to_json()
    assert a == b
    assert '"format_version": 1' in a


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-100, 150), min_size=6, max_size=20), st.integers(2, 5))
def test_soc_deviation_bounded_by_capacity(prices, T):
    series = PriceSeries.from_values(prices)
    sol = solve_global(series, P)
    matrix, runs = sweep(series, P, sol, [T])
    row = compute_metrics(sol, [(T, runs[T], matrix.row(T))]).row(T)
    assert 0.0 <= row.avg_soc_dev <= P.soc_max - P.soc_min + 1e-9
    assert row.shortfall_abs >= -1e-6
    if row.mismatch_count == 0:
        # each matched step may drift by epsilon / eta_d at most
        assert row.avg_soc_dev <= len(prices) * 1e-4 / P.eta_d + 1e-9
