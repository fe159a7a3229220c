"""Drift control with discretionary stopping.

Thin wrapper over the compiled extension: threshold solver, value function,
hitting-time formulas, the expectation-constrained variant, and a
reproducible Monte Carlo engine.
"""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    ConstrainedSolution,
    CostEstimate,
    Policy,
    ProblemInstance,
    SolverError,
    ThresholdResult,
    ValueFunction,
    build_problem_json,
    check_variational_inequalities,
    constrained_value,
    envelope_residual,
    estimate_cost,
    estimate_hitting_time,
    expected_hitting_time,
    expected_hitting_time_oracle,
    expected_optimal_stop_time,
    optimal_policy,
    run_command,
    solve_lagrange_multiplier,
    solve_threshold,
    verify_assumptions,
    zeta,
)


def build_problem(problem):
    """Build a ProblemInstance from a problem description dict."""
    return build_problem_json(_json.dumps(problem))
