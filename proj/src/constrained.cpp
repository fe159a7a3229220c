#include "dstop/constrained.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dstop/errors.hpp"

namespace dstop {

double expected_optimal_stop_time(const ProblemInstance& instance, double x,
                                  double c_eff) {
    if (!(c_eff > 0.0)) {
        throw std::invalid_argument("expected_optimal_stop_time requires c_eff > 0");
    }
    const ThresholdResult tr = solve_threshold(with_operating_cost(instance, c_eff));
    const double ax = std::abs(x);
    if (!tr.finite || ax <= tr.s) return 0.0;
    return 2.0 / (instance.A - 2.0 * tr.u_star) *
           inverse_drift_integral(instance, tr.s, ax);
}

double solve_lagrange_multiplier(const ProblemInstance& instance, double x,
                                 double c, double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    if (std::isinf(alpha)) return 0.0;
    const double ax = std::abs(x);
    if (ax == 0.0) return 0.0;  // E[tau*] = 0 for every cost

    auto expectation = [&](double lambda) {
        return expected_optimal_stop_time(instance, ax, c + lambda);
    };

    // At c = 0 the expectation blows up as lambda -> 0+, so lambda = 0 is
    // feasible only when c > 0 witnesses it directly.
    if (c > 0.0 && expectation(0.0) <= alpha) return 0.0;

    double hi = 1.0;
    std::size_t doublings = 0;
    while (expectation(hi) > alpha) {
        hi *= 2.0;
        if (++doublings > 200) {
            throw solver_error("Lagrange multiplier bracket failed to close");
        }
    }
    double lo = 0.0;  // infeasible end (E > alpha), never evaluated at c = 0
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (expectation(mid) > alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-14 * std::max(1.0, hi)) break;
    }
    return hi;  // smallest feasible point found, E[tau*](hi) <= alpha
}

ConstrainedSolution constrained_value(const ProblemInstance& instance,
                                      double x, double c, double alpha) {
    if (!(c >= 0.0)) throw std::invalid_argument("c must be >= 0");
    const double ax = std::abs(x);
    ConstrainedSolution out;
    out.lambda_hat = solve_lagrange_multiplier(instance, ax, c, alpha);
    out.effective_c = c + out.lambda_hat;

    if (out.effective_c == 0.0) {
        // Remark-2 degenerate branch: zero effective cost, drift to the
        // origin for free, V is the limit k(0).
        out.zero_cost_degenerate = true;
        out.threshold.finite = false;
        out.threshold.s = std::numeric_limits<double>::infinity();
        out.value = instance.k(0.0);
        out.expected_tau = 0.0;
        out.slackness_residual = 0.0;
        return out;
    }

    const ProblemInstance effective = with_operating_cost(instance, out.effective_c);
    out.threshold = solve_threshold(effective);
    const ValueFunction vf(effective, out.threshold);
    const double v_unconstrained = vf(ax);
    out.expected_tau =
        (!out.threshold.finite || ax <= out.threshold.s)
            ? 0.0
            : 2.0 / (instance.A - 2.0 * out.threshold.u_star) *
                  inverse_drift_integral(instance, out.threshold.s, ax);
    // lambda_hat = 0 keeps the value finite when alpha is the +inf sentinel.
    out.value = out.lambda_hat == 0.0 ? v_unconstrained
                                      : v_unconstrained - out.lambda_hat * alpha;
    out.slackness_residual =
        out.lambda_hat == 0.0 ? 0.0 : out.lambda_hat * (alpha - out.expected_tau);
    return out;
}

double envelope_residual(const ProblemInstance& instance, double x, double c,
                         double h) {
    if (!(h > 0.0) || !(c - h > 0.0)) {
        throw std::invalid_argument("envelope_residual requires 0 < h < c");
    }
    const double ax = std::abs(x);
    const double v_plus = unconstrained_value(instance, ax, c + h);
    const double v_minus = unconstrained_value(instance, ax, c - h);
    const double fd = (v_plus - v_minus) / (2.0 * h);
    return std::abs(fd - expected_optimal_stop_time(instance, ax, c));
}

std::vector<std::pair<double, double>> dual_value_scan(
    const ProblemInstance& instance, double x, double c, double alpha,
    std::span<const double> lambda_grid) {
    std::vector<std::pair<double, double>> scan;
    scan.reserve(lambda_grid.size());
    const double ax = std::abs(x);
    for (double lambda : lambda_grid) {
        if (lambda < 0.0) {
            throw std::invalid_argument("dual scan grid must be nonnegative");
        }
        const double v = unconstrained_value(instance, ax, c + lambda);
        scan.emplace_back(lambda, v - lambda * alpha);
    }
    return scan;
}

}  // namespace dstop
