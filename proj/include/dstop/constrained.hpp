#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dstop/solver.hpp"

namespace dstop {

/// Answer to the expectation-constrained problem: the smallest multiplier
/// lambda_hat with E[tau*] <= alpha at operating cost c + lambda_hat, the
/// unconstrained solve at that effective cost, and the shifted value
/// V_alpha = V(x, c + lambda_hat) - lambda_hat * alpha.
struct ConstrainedSolution {
    double lambda_hat = 0.0;
    double effective_c = 0.0;
    ThresholdResult threshold;
    double value = 0.0;
    double expected_tau = 0.0;
    double slackness_residual = 0.0;  // lambda_hat * (alpha - E[tau*])
    bool zero_cost_degenerate = false;
};

/// E[tau*] for the optimal rule at operating cost c_eff > 0:
/// (2 / (A - 2 u*)) int_{s(c_eff)}^x dy/mu when x > s(c_eff), else 0
/// (also 0 when the threshold is infinite: stop at once).
double expected_optimal_stop_time(const ProblemInstance& instance, double x,
                                  double c_eff);

/// Smallest lambda >= 0 with E[tau*_{x, c+lambda}] <= alpha. Bisection on the
/// decreasing map lambda -> E[tau*], residual tolerance 1e-10. alpha may be
/// +infinity (unconstrained sentinel).
double solve_lagrange_multiplier(const ProblemInstance& instance, double x,
                                 double c, double alpha);

ConstrainedSolution constrained_value(const ProblemInstance& instance,
                                      double x, double c, double alpha);

/// |central difference of c -> V(x, c) at step h  -  E[tau*_{x,c}]|.
/// The two sides come from independent code paths. Requires c - h > 0.
double envelope_residual(const ProblemInstance& instance, double x, double c,
                         double h);

/// Dual objective lambda -> V(x, c + lambda) - lambda * alpha across the
/// grid. Its maximum equals the constrained value (no duality gap) and is
/// attained at lambda_hat within grid resolution.
std::vector<std::pair<double, double>> dual_value_scan(
    const ProblemInstance& instance, double x, double c, double alpha,
    std::span<const double> lambda_grid);

}  // namespace dstop
