import numpy as np
import pytest

from lp_exact import check_against_exact, random_program, to_program
from stochpa import lp
from stochpa.lp import LpBuilder, Sense, Status


@pytest.mark.parametrize("method", ["highs", "simplex"])
def test_single_var_max(method):
    b = LpBuilder(1)
    b.add_constraint({0: 1.0}, "<=", 3.0)
    res = lp.solve(b.build({0: 1.0}, Sense.MAXIMIZE), method=method)
    assert res.status is Status.OPTIMAL and res.solution[0] == pytest.approx(3.0)


@pytest.mark.parametrize("method", ["highs", "simplex"])
def test_infeasible(method):
    b = LpBuilder(1)
    b.set_bounds(0, lower=-np.inf)
    b.add_constraint({0: 1.0}, "<=", 0.0)
    b.add_constraint({0: 1.0}, ">=", 1.0)
    assert lp.solve(b.build({0: 1.0}, Sense.MAXIMIZE), method=method).status is Status.INFEASIBLE


@pytest.mark.parametrize("method", ["highs", "simplex"])
def test_simplex_corner(method):
    b = LpBuilder(2)
    b.add_constraint({0: 1.0, 1: 1.0}, "<=", 1.0)
    res = lp.solve(b.build({0: 1.0, 1: 1.0}, Sense.MAXIMIZE), method=method)
    assert res.objective_value == pytest.approx(1.0)


@pytest.mark.parametrize("method", ["highs", "simplex"])
def test_unbounded(method):
    b = LpBuilder(2)
    b.add_constraint({0: 1.0, 1: -1.0}, "<=", 1.0)
    assert lp.solve(b.build({0: 1.0}, Sense.MAXIMIZE), method=method).status is Status.UNBOUNDED


def test_check_feasible_cases():
    b = LpBuilder(1)
    b.set_bounds(0, 0.0, 1.0)
    ok, w = lp.check_feasible(b.build())
    assert ok and 0.0 <= w[0] <= 1.0
    b = LpBuilder(1)
    b.add_constraint({0: 1.0}, "=", 0.0)
    b.add_constraint({0: 1.0}, "=", 1.0)
    assert lp.check_feasible(b.build()) == (False, None)


def test_feasibility_sense_reports_feasible():
    b = LpBuilder(2)
    b.add_constraint({0: 1.0, 1: 1.0}, "=", 1.0)
    res = lp.solve(b.build())
    assert res.status is Status.FEASIBLE and res.solution.sum() == pytest.approx(1.0)


def test_degenerate_cycling_example_terminates():
    # Beale's classic cycling program; Bland's rule must terminate
    b = LpBuilder(4)
    b.add_constraint({0: 0.25, 1: -8.0, 2: -1.0, 3: 9.0}, "<=", 0.0)
    b.add_constraint({0: 0.5, 1: -12.0, 2: -0.5, 3: 3.0}, "<=", 0.0)
    b.add_constraint({2: 1.0}, "<=", 1.0)
    p = b.build({0: 0.75, 1: -20.0, 2: 0.5, 3: -6.0}, Sense.MAXIMIZE)
    res = lp.solve(p, method="simplex")
    assert res.status is Status.OPTIMAL and res.objective_value == pytest.approx(1.25)


def test_lp_text_dump():
    b = LpBuilder(2)
    b.add_constraint({0: 1.0, 1: 2.0}, "<=", 4.0)
    text = lp.to_lp_text(b.build({0: 1.0}, Sense.MAXIMIZE), names=["x", "y"])
    assert "Maximize" in text and "c0: 1.0 x + 2.0 y <= 4.0" in text and "0.0 <= y <= +inf" in text


@pytest.mark.parametrize("method", ["highs", "simplex"])
def test_random_programs_match_exact_rational(method):
    bad = [info for ok, info in (check_against_exact(s, method) for s in range(120)) if not ok]
    assert not bad


def test_row_scaling_preserves_status():
    for seed in range(60):
        rng = np.random.default_rng(seed)
        n, obj, rows, _ = random_program(rng)
        base = lp.solve(to_program(n, obj, rows, Sense.MAXIMIZE))
        scaled = lp.solve(to_program(n, obj, rows, Sense.MAXIMIZE, scale=rng.uniform(0.1, 50, len(rows))))
        assert base.status is scaled.status
        if base.status is Status.OPTIMAL:
            assert base.objective_value == pytest.approx(scaled.objective_value, abs=1e-7)


def test_witness_always_within_tolerance():
    for seed in range(60):
        n, obj, rows, _ = random_program(np.random.default_rng(seed))
        p = to_program(n, obj, rows, Sense.MAXIMIZE)
        res = lp.solve(p)
        if res.solution is not None:
            assert p.violation(res.solution) <= lp.FEAS_TOL
