import numpy as np
import pytest
import scipy.sparse as sp
from scipy.optimize import linprog

from horizon_probe.solver import solve_lp


def _random_lp(rng, m, n):
    A = rng.normal(size=(m, n))
    A[rng.random((m, n)) < 0.5] = 0.0
    x0 = rng.uniform(0.0, 1.0, n)
    b = A @ x0  # feasible by construction
    c = rng.normal(size=n)
    return c, A, b, np.zeros(n), np.ones(n)


@pytest.mark.parametrize("rule", ["bland", "dantzig"])
@pytest.mark.parametrize("seed", range(12))
def test_matches_highs_on_random_boxes(seed, rule):
    rng = np.random.default_rng(seed)
    c, A, b, lo, hi = _random_lp(rng, 6, 14)
    ours = solve_lp(c, sp.csc_matrix(A), b, lo, hi, rule=rule)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=list(zip(lo, hi)), method="highs")
    assert ours.status == "optimal"
    assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
    assert np.allclose(A @ ours.x, b, atol=1e-8)
    assert np.all(ours.x >= lo - 1e-9) and np.all(ours.x <= hi + 1e-9)


def test_infeasible():
    A = np.array([[1.0, 1.0]])
    res = solve_lp([1.0, 1.0], A, [3.0], [0.0, 0.0], [1.0, 1.0])
    assert res.status == "infeasible"
    assert res.x is None


def test_crossed_bounds_infeasible():
    res = solve_lp([1.0], np.array([[1.0]]), [0.0], [1.0], [0.0])
    assert res.status == "infeasible"


def test_feasible_basis_hint_skips_phase_one():
    # x0 + x1 = 1 with x0 basic at 1 is feasible; optimum moves to x1
    A = np.array([[1.0, 1.0]])
    res = solve_lp([1.0, 0.0], A, [1.0], [0.0, 0.0], [2.0, 2.0], basis=[0])
    assert res.status == "optimal"
    assert res.x.tolist() == pytest.approx([0.0, 1.0])


def test_iteration_limit():
    rng = np.random.default_rng(1)
    c, A, b, lo, hi = _random_lp(rng, 8, 20)
    assert solve_lp(c, A, b, lo, hi, max_iter=1).status == "iteration_limit"


def test_refactor_does_not_change_answer():
    rng = np.random.default_rng(5)
    c, A, b, lo, hi = _random_lp(rng, 10, 30)
    a = solve_lp(c, A, b, lo, hi, refactor_every=100)
    b2 = solve_lp(c, A, b, lo, hi, refactor_every=3)
    assert a.objective == pytest.approx(b2.objective, abs=1e-9)


def test_unknown_rule():
    with pytest.raises(ValueError):
        solve_lp([1.0], np.array([[1.0]]), [0.0], [0.0], [1.0], rule="steepest")


def test_deterministic_bits():
    rng = np.random.default_rng(9)
    c, A, b, lo, hi = _random_lp(rng, 7, 18)
    x1 = solve_lp(c, A, b, lo, hi).x
    x2 = solve_lp(c, A, b, lo, hi).x
    assert x1.tobytes() == x2.tobytes()
