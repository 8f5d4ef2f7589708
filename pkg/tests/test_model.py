import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horizon_probe.errors import InvalidParams, LengthMismatch
from horizon_probe.model import (
    EssParams,
    Schedule,
    ScheduleProblem,
    ViolationKind,
    cumulative_profit,
    format_trajectory_csv,
    make_schedule,
    profit,
    simulate_soc,
    step_soc,
    validate_schedule,
)


def test_step_soc_charge(params):
    assert step_soc(5.0, 1.0, 0.0, params) == pytest.approx(5.8, abs=1e-12)


def test_step_soc_lossless_idle():
    p = EssParams(rho=1.0)
    assert step_soc(5.0, 0.0, 0.0, p) == 5.0


def test_step_soc_discharge(params):
    assert step_soc(5.0, 0.0, 1.0, params) == pytest.approx(4.95 - 1 / 0.85, abs=1e-12)
    assert step_soc(5.0, 0.0, 1.0, params) == pytest.approx(3.773529411764706, abs=1e-12)


def test_step_soc_does_not_clamp(params):
    assert step_soc(0.0, 0.0, 1.0, params) < 0.0


@pytest.mark.parametrize(
    "pc, pd, expected",
    [([0, 0], [1, 1], 60.0), ([0, 0], [0, 0], 0.0), ([1, 0], [0, 1], 40.0)],
)
def test_profit_examples(pc, pd, expected):
    s = Schedule(pc, pd, [0, 0], 0.0)
    assert profit(s, [10.0, 50.0], 1.0) == pytest.approx(expected, abs=1e-12)


def test_profit_length_mismatch():
    with pytest.raises(LengthMismatch):
        profit(Schedule([0, 0], [1, 1], [0, 0], 0.0), [1.0, 2.0, 3.0], 1.0)


def test_profit_scales_with_dt():
    s = Schedule([0], [1], [0], 0.0)
    assert profit(s, [40.0], 0.25) == pytest.approx(10.0)


def test_cumulative_profit_last_equals_profit():
    s = Schedule([0.3, 0, 0.1], [0, 0.7, 0], [0, 0, 0], 0.0)
    prices = [11.1, 37.3, -5.9]
    assert cumulative_profit(s, prices, 1.0)[-1] == profit(s, prices, 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"eta_c": 0.0},
        {"eta_d": 1.2},
        {"rho": -0.1},
        {"soc_init": 11.0},
        {"soc_min": 6.0},
        {"p_charge_max": 0.0},
        {"dt_hours": 0.0},
    ],
)
def test_invalid_params(kwargs):
    with pytest.raises(InvalidParams):
        EssParams(**kwargs)


def test_params_dict_round_trip():
    p = EssParams(rho=0.95, soc_max=12.0, soc_init=6.0)
    assert EssParams.from_dict(p.to_dict()) == p
    with pytest.raises(InvalidParams):
        EssParams.from_dict({"capacity": 3})


def test_problem_rejects_bad_initial_soc(params):
    with pytest.raises(InvalidParams):
        ScheduleProblem(params, [1.0, 2.0], 10.5)
    # tiny rounding drift past a bound is tolerated
    ScheduleProblem(params, [1.0, 2.0], 10.0 + 1e-9)


def _problem(prices, params=None):
    return ScheduleProblem.from_params(params or EssParams(), prices)


def test_validate_clean_schedule():
    prob = _problem([10.0, 50.0, 30.0])
    s = make_schedule([1, 0, 0], [0, 1, 0.5], prob)
    assert validate_schedule(s, prob) == []


def test_validate_simultaneity_step():
    prob = _problem([10.0, 50.0, 30.0])
    s = make_schedule([0, 0, 0.4], [0, 1, 0.4], prob)
    found = validate_schedule(s, prob)
    assert [(v.kind, v.step) for v in found] == [(ViolationKind.SIMULTANEITY, 3)]
    assert found[0].magnitude == pytest.approx(0.4)


def test_validate_dynamics_mismatch():
    prob = _problem([10.0, 50.0, 30.0])
    good = make_schedule([1, 0, 0], [0, 1, 0], prob)
    soc = np.array(good.soc)
    soc[1] += 0.01
    bad = Schedule(good.p_charge, good.p_discharge, soc, good.objective)
    kinds = {(v.kind, v.step) for v in validate_schedule(bad, prob)}
    # the corrupted SoC breaks the balance into step 2 and out of step 3
    assert (ViolationKind.DYNAMICS_MISMATCH, 2) in kinds
    assert (ViolationKind.DYNAMICS_MISMATCH, 3) in kinds
    assert all(k == ViolationKind.DYNAMICS_MISMATCH for k, _ in kinds)


def test_validate_bounds_and_caps():
    prob = _problem([1.0, 2.0], EssParams(soc_init=0.0))
    s = make_schedule([0.0, 1.5], [1.0, 0.0], prob)
    kinds = {(v.kind, v.step) for v in validate_schedule(s, prob)}
    assert (ViolationKind.SOC_BELOW_MIN, 1) in kinds
    assert (ViolationKind.CHARGE_OVER_CAP, 2) in kinds
    s = make_schedule([-0.5, 0.0], [0.0, 0.0], prob)
    assert ViolationKind.NEGATIVE_POWER in {v.kind for v in validate_schedule(s, prob)}


def test_validate_rejects_nonpositive_tol():
    prob = _problem([1.0])
    with pytest.raises(ValueError):
        validate_schedule(make_schedule([0], [0], prob), prob, tol=0.0)


def test_trajectory_csv_shape():
    prob = _problem([10.0, 50.0])
    s = make_schedule([0, 0], [1, 1], prob)
    text = format_trajectory_csv(prob.prices, s, cumulative_profit(s, prob.prices, 1.0))
    lines = text.splitlines()
    assert lines[0] == "t,price_eur_mwh,p_charge_mw,p_discharge_mw,soc_mwh,cum_profit_eur"
    assert lines[2].split(",")[-1] == "60.0"


powers = st.floats(min_value=0.0, max_value=1.0)
socs = st.floats(min_value=0.0, max_value=10.0)


@settings(max_examples=100, deadline=None)
@given(socs, socs, powers, powers)
def test_step_soc_monotone(s1, s2, pc, pd):
    p = EssParams()
    lo, hi = sorted((s1, s2))
    assert step_soc(lo, pc, pd, p) <= step_soc(hi, pc, pd, p)


@settings(max_examples=100, deadline=None)
@given(socs, powers, powers, powers)
def test_step_soc_monotone_in_actions(s, a, b, pd):
    p = EssParams()
    lo, hi = sorted((a, b))
    assert step_soc(s, lo, pd, p) <= step_soc(s, hi, pd, p)
    assert step_soc(s, pd, lo, p) >= step_soc(s, pd, hi, p)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.tuples(powers, powers, st.floats(-200, 200)), min_size=1, max_size=20),
    st.floats(min_value=-3.0, max_value=3.0),
)
def test_profit_linear_in_prices(rows, k):
    pc, pd, prices = map(np.array, zip(*rows))
    s = Schedule(pc, pd, np.zeros(pc.size), 0.0)
    assert profit(s, k * prices, 1.0) == pytest.approx(
        k * profit(s, prices, 1.0), rel=1e-9, abs=1e-9
    )


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(powers, powers), min_size=1, max_size=20))
def test_simulated_soc_passes_dynamics_check(actions):
    p = EssParams()
    pc, pd = map(np.array, zip(*actions))
    prob = ScheduleProblem.from_params(p, np.zeros(pc.size))
    s = Schedule(pc, pd, simulate_soc(p.soc_init, pc, pd, p), 0.0)
    kinds = {v.kind for v in validate_schedule(s, prob)}
    assert ViolationKind.DYNAMICS_MISMATCH not in kinds
