import json
import math

import pytest

import dstop

QC = {
    "drift": {"family": "constant", "m": 1.0},
    "dispersion": {"family": "constant", "sigma0": 1.0},
    "terminal": {"family": "quadratic", "kappa": 1.0},
    "running": {"family": "quadratic", "beta": 1.0},
    "c": 1.0,
}


def qc_instance(c=1.0):
    problem = dict(QC)
    problem["c"] = c
    return dstop.build_problem(problem)


def test_build_and_coefficient():
    inst = qc_instance()
    assert inst.A == 0.0
    assert inst.c == 1.0
    assert inst.k(2.0) == 4.0
    assert inst.mu(-3.0) == inst.mu(3.0)


def test_threshold_closed_form():
    for c in (0.25, 1.0, 4.0):
        tr = dstop.solve_threshold(qc_instance(c))
        assert tr.finite
        assert abs(tr.s - math.sqrt(c)) <= 1e-10
        assert abs(tr.u_star + math.sqrt(c)) <= 1e-10


def test_value_function():
    vf = dstop.ValueFunction(qc_instance())
    assert abs(vf(2.0) - 3.0) <= 1e-8
    assert vf(0.5) == 0.25
    assert vf(-2.0) == vf(2.0)
    assert vf.smooth_fit_residual() <= 1e-6


def test_constrained_solution():
    sol = dstop.constrained_value(qc_instance(0.25), 2.0, 1.0)
    assert abs(sol.lambda_hat - 0.75) <= 1e-8
    assert abs(sol.value - 2.25) <= 1e-8
    assert abs(sol.slackness_residual) <= 1e-10


def test_hitting_time_routes_agree():
    inst = qc_instance()
    closed = dstop.expected_hitting_time(inst, -1.0, 1.0, 2.0)
    oracle = dstop.expected_hitting_time_oracle(inst, -1.0, 1.0, 2.0, 2.5)
    assert abs(closed - 1.0) <= 1e-10
    assert abs(closed - oracle) <= 1e-6


def test_assumptions_and_vi():
    report = dstop.verify_assumptions(qc_instance())
    assert all(item["pass"] for item in report.values())
    vi = dstop.check_variational_inequalities(qc_instance(), points=2000)
    assert vi["pass"]


def test_monte_carlo_matches_value_and_is_deterministic():
    inst = qc_instance()
    policy = dstop.Policy.constant_threshold(-1.0, 1.0)
    a = dstop.estimate_cost(inst, policy, 2.0, n_paths=5000, seed=3, threads=1)
    b = dstop.estimate_cost(inst, policy, 2.0, n_paths=5000, seed=3, threads=2)
    assert a.mean == b.mean
    assert a.standard_error == b.standard_error
    assert abs(a.mean - 3.0) <= 3.0 * a.standard_error + 0.03


def test_run_command_round_trip():
    config = {
        "problem": QC,
        "solve": {"x": [0.5, 2.0]},
    }
    code, text = dstop.run_command(json.dumps(config), "solve")
    assert code == 0
    report = json.loads(text)
    assert report["s"] == pytest.approx(1.0)
    assert report["values"][1]["V"] == pytest.approx(3.0)


def test_invalid_config_raises():
    with pytest.raises(ValueError):
        dstop.build_problem({"drift": {"family": "unknown"}})
