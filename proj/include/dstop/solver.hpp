#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "dstop/convex.hpp"
#include "dstop/policy.hpp"
#include "dstop/problem.hpp"

namespace dstop {

/// Free-boundary answer. When finite: s solves zeta(s) + c = 0,
/// gamma = mu(s) k'(s) > 0, b = k(s), u_star = xi(-gamma) < 0.
/// When infinite, only `finite` and `s` (+inf) are meaningful.
struct ThresholdResult {
    bool finite = false;
    double s = 0.0;
    double gamma = 0.0;
    double b = 0.0;
    double u_star = 0.0;
    double residual = 0.0;  // |zeta(s) + c| at the root
};

/// zeta(z) = eta(mu(z) k'(z)) - (A/2) mu(z) k'(z); strictly decreasing on
/// (0, inf) under the standing assumptions.
double zeta(const ProblemInstance& instance, double z);

/// Unique root of zeta(z) = -c on (0, inf), found by expanding bracket plus
/// Brent, with |zeta(s) + c| <= 1e-12 max(1, c). Returns an infinite result
/// when zeta(z) > -c all the way to z = 1e12 (monotone decrease makes the
/// probe conclusive). Requires c > 0; detects non-monotone zeta and throws.
ThresholdResult solve_threshold(const ProblemInstance& instance);

/// integral of dy / mu(y) over [a, b] by adaptive quadrature.
double inverse_drift_integral(const ProblemInstance& instance, double a,
                              double b, double abs_tol = 1e-10);

/// Even value function: k(x) inside [-s, s], k(s) + gamma * int_s^|x| dy/mu
/// outside, k everywhere when s is infinite, and identically k(0) when c = 0.
class ValueFunction {
public:
    /// Solves the threshold (or takes the zero-cost branch when c = 0).
    explicit ValueFunction(const ProblemInstance& instance);
    ValueFunction(const ProblemInstance& instance, ThresholdResult threshold);

    double operator()(double x) const;
    /// Exact piecewise derivative (k' inside, gamma/mu outside).
    double derivative(double x) const;
    /// Exact piecewise second derivative; undefined exactly at |x| = s.
    double second_derivative(double x) const;

    /// |V'(s-) - V'(s+)| by second-order one-sided difference quotients.
    double smooth_fit_residual(double h = 1e-6) const;

    const ThresholdResult& threshold() const { return threshold_; }
    const ProblemInstance& instance() const { return instance_; }
    bool zero_cost_degenerate() const { return zero_cost_; }

    /// Cached int_s^{|x|} dy / mu(y) for |x| > s.
    double tail_integral(double x) const;

private:
    ProblemInstance instance_;
    ThresholdResult threshold_;
    bool zero_cost_ = false;
    mutable std::map<double, double> cache_;
    mutable std::mutex cache_mutex_;
};

/// V(x, c_override) convenience: solves at the shifted operating cost.
double unconstrained_value(const ProblemInstance& instance, double x, double c);

/// Optimal rule: constant control u_star with threshold s when the
/// threshold is finite and c > 0; stop at once otherwise.
Policy optimal_policy(const ProblemInstance& instance,
                      const ThresholdResult& threshold);

struct VIReport {
    std::vector<double> grid;
    std::vector<double> r1;  // k - V
    std::vector<double> r2;  // (1/2) V'' sigma^2 + eta(mu V') + c
    std::vector<double> r3;  // r1 * r2 / max(1, |r1|, |r2|)
    double min_r1 = 0.0;
    double min_r2 = 0.0;
    double max_r3_scaled = 0.0;
    double tol = 0.0;
    bool pass = false;
};

/// Symmetric grid on +-[lo, hi] with n positive points, excluding a
/// neighborhood of the free boundary where V'' may jump.
std::vector<double> vi_grid(const ThresholdResult& threshold, double lo,
                            double hi, std::size_t n, double exclusion = 1e-6);

/// Pointwise residuals of the three variational inequalities using the exact
/// piecewise derivatives of V. Failures are reported, not thrown.
VIReport check_variational_inequalities(const ValueFunction& vf,
                                        std::span<const double> grid,
                                        double tol);

/// Variant for the variance-controlled dynamics (drift coefficient must be
/// the constant 1): the minimized generator becomes
/// min_u [ (1/2) V'' sigma^2 u^2 + u V' + psi(u) ] + c.
VIReport check_variational_inequalities_variance(const ValueFunction& vf,
                                                 std::span<const double> grid,
                                                 double tol);

}  // namespace dstop
