#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dstop/policy.hpp"
#include "dstop/problem.hpp"
#include "dstop/solver.hpp"

namespace dstop {

enum class ControlMode { DriftControl, VarianceControl };

struct SimConfig {
    double dt = 1e-3;            // <= 1e-2
    std::size_t n_paths = 100000;
    std::uint64_t seed = 0;
    double t_max = 50.0;         // truncation horizon
    ControlMode mode = ControlMode::DriftControl;
    unsigned threads = 0;        // 0 = hardware concurrency

    void validate() const;
};

/// t_max rule of thumb: max(50, 20 * analytic expectation when available).
double default_t_max(double expected_tau);

struct PathOutcome {
    double stop_time = 0.0;
    double terminal_x = 0.0;
    double accumulated_cost = 0.0;  // k(X_stop) + psi(u) tau + c tau
    bool truncated = false;
};

struct CostEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    std::size_t n_truncated = 0;
    double mean_stop_time = 0.0;
    double stop_time_standard_error = 0.0;
    std::size_t n_paths = 0;
    /// False once more than 1% of paths hit the truncation horizon.
    bool valid_for_acceptance = true;
};

/// One Euler-Maruyama path from |x| under the given policy. Randomness is a
/// pure function of (seed, path_index, step), so outcomes are independent of
/// scheduling. Throws solver_error naming the step on a non-finite state.
PathOutcome simulate_path(const ProblemInstance& instance, const Policy& policy,
                          double x, const SimConfig& cfg,
                          std::uint64_t path_index);

/// n_paths independent paths (n_paths >= 1000), executed on cfg.threads
/// workers; estimates are bit-identical for any thread count because each
/// path owns a slot and the reduction order is fixed.
CostEstimate estimate_cost(const ProblemInstance& instance, const Policy& policy,
                           double x, const SimConfig& cfg);

/// Stop-time statistics only (cost accumulation ignored); policy is the
/// constant control u < 0 with threshold s.
CostEstimate estimate_hitting_time(const ProblemInstance& instance, double u,
                                   double s, double x, const SimConfig& cfg);

struct PerturbationRow {
    double u_scale = 1.0;
    double s_scale = 1.0;
    double u = 0.0;
    double s = 0.0;
    CostEstimate estimate;
    double analytic_cost = 0.0;  // k(s) + (c + psi(u)) E[tau], or k(x) if s >= x
    bool lower_bound_ok = false; // mean >= V(x) - 3 SE - bias budget
};

struct PerturbationReport {
    double value = 0.0;        // analytic V(x)
    double bias_budget = 0.0;
    std::vector<PerturbationRow> rows;  // identity perturbation first
    bool identity_matches_value = false;
    bool pass = false;
};

/// Scales the optimal policy by each (u_scale, s_scale), estimates its cost,
/// and checks the value function is a lower bound within 3 SE + bias budget.
/// The identity row must additionally match V(x) within the same budget.
/// Requires a finite optimal threshold.
PerturbationReport perturbation_suite(
    const ProblemInstance& instance, double x, const SimConfig& cfg,
    std::span<const std::pair<double, double>> perturbations,
    double bias_budget = 0.03);

}  // namespace dstop
