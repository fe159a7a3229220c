#include "dstop/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "dstop/errors.hpp"
#include "dstop/numerics.hpp"

namespace dstop {

namespace {

constexpr double kInfiniteProbe = 1e12;

double threshold_equation_tolerance(double c) {
    return 1e-12 * std::max(1.0, c);
}

}  // namespace

double zeta(const ProblemInstance& instance, double z) {
    const ConjugatePair conj(instance.running);
    const double w = instance.mu(z) * instance.k_prime(z);
    return conj.eta(w) - 0.5 * instance.A * w;
}

ThresholdResult solve_threshold(const ProblemInstance& instance) {
    if (!(instance.c > 0.0)) {
        throw std::invalid_argument("solve_threshold requires c > 0");
    }
    const double c = instance.c;
    auto f = [&](double z) { return zeta(instance, z) + c; };

    // f is strictly decreasing; expand geometrically from 1 until the sign
    // flips. Non-monotone probes indicate a violated assumption.
    double lo = 1.0, hi = 1.0;
    double f_lo = f(1.0), f_hi = f_lo;
    const auto slack = [](double v) { return 1e-10 * std::max(1.0, std::abs(v)); };
    if (f_lo > 0.0) {
        while (f_hi > 0.0) {
            const double next = 2.0 * hi;
            if (next > kInfiniteProbe) {
                ThresholdResult inf_result;
                inf_result.finite = false;
                inf_result.s = std::numeric_limits<double>::infinity();
                inf_result.gamma = std::numeric_limits<double>::quiet_NaN();
                inf_result.b = std::numeric_limits<double>::quiet_NaN();
                inf_result.u_star = std::numeric_limits<double>::quiet_NaN();
                inf_result.residual = std::numeric_limits<double>::quiet_NaN();
                return inf_result;
            }
            const double f_next = f(next);
            if (f_next > f_hi + slack(f_hi)) {
                throw solver_error("zeta is not decreasing: assumption violation");
            }
            lo = hi;
            f_lo = f_hi;
            hi = next;
            f_hi = f_next;
        }
    } else if (f_lo < 0.0) {
        while (f_lo < 0.0) {
            const double next = 0.5 * lo;
            if (next < 1e-300) {
                throw solver_error("failed to bracket the stopping threshold near 0");
            }
            const double f_next = f(next);
            if (f_next < f_lo - slack(f_lo)) {
                throw solver_error("zeta is not decreasing: assumption violation");
            }
            hi = lo;
            f_hi = f_lo;
            lo = next;
            f_lo = f_next;
        }
    }

    double s;
    if (f_lo == 0.0) {
        s = lo;
    } else if (f_hi == 0.0) {
        s = hi;
    } else {
        s = brent(f, lo, hi, f_lo, f_hi, 1e-15);
    }

    ThresholdResult result;
    result.finite = true;
    result.s = s;
    result.residual = std::abs(f(s));
    if (result.residual > threshold_equation_tolerance(c)) {
        throw solver_error("threshold root refinement failed to meet tolerance");
    }
    result.gamma = instance.mu(s) * instance.k_prime(s);
    result.b = instance.k(s);
    result.u_star = ConjugatePair(instance.running).xi(-result.gamma);
    return result;
}

double inverse_drift_integral(const ProblemInstance& instance, double a,
                              double b, double abs_tol) {
    return integrate([&](double y) { return 1.0 / instance.mu(y); }, a, b,
                     abs_tol);
}

ValueFunction::ValueFunction(const ProblemInstance& instance)
    : instance_(instance) {
    if (instance_.c == 0.0) {
        zero_cost_ = true;
        threshold_.finite = false;
        threshold_.s = std::numeric_limits<double>::infinity();
    } else {
        threshold_ = solve_threshold(instance_);
    }
}

ValueFunction::ValueFunction(const ProblemInstance& instance,
                             ThresholdResult threshold)
    : instance_(instance), threshold_(threshold) {
    zero_cost_ = instance_.c == 0.0;
}

double ValueFunction::tail_integral(double x) const {
    const double ax = std::abs(x);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(ax);
    if (it != cache_.end()) return it->second;
    const double value = inverse_drift_integral(instance_, threshold_.s, ax);
    cache_.emplace(ax, value);
    return value;
}

double ValueFunction::operator()(double x) const {
    if (zero_cost_) return instance_.k(0.0);
    const double ax = std::abs(x);
    if (!threshold_.finite || ax <= threshold_.s) return instance_.k(ax);
    return threshold_.b + threshold_.gamma * tail_integral(ax);
}

double ValueFunction::derivative(double x) const {
    if (zero_cost_) return 0.0;
    const double ax = std::abs(x);
    if (!threshold_.finite || ax <= threshold_.s) {
        return instance_.k_prime(x);  // k' is odd, handles both signs
    }
    const double slope = threshold_.gamma / instance_.mu(ax);
    return std::copysign(slope, x);
}

double ValueFunction::second_derivative(double x) const {
    if (zero_cost_) return 0.0;
    const double ax = std::abs(x);
    if (!threshold_.finite || ax < threshold_.s) return instance_.k_second(ax);
    return -threshold_.gamma * instance_.mu_prime(ax) /
           (instance_.mu(ax) * instance_.mu(ax));
}

double ValueFunction::smooth_fit_residual(double h) const {
    if (zero_cost_ || !threshold_.finite) return 0.0;
    const double s = threshold_.s;
    const auto& v = *this;
    const double left =
        (3.0 * v(s) - 4.0 * v(s - h) + v(s - 2.0 * h)) / (2.0 * h);
    const double right =
        (-3.0 * v(s) + 4.0 * v(s + h) - v(s + 2.0 * h)) / (2.0 * h);
    return std::abs(left - right);
}

double unconstrained_value(const ProblemInstance& instance, double x, double c) {
    return ValueFunction(with_operating_cost(instance, c))(x);
}

Policy optimal_policy(const ProblemInstance& instance,
                      const ThresholdResult& threshold) {
    if (instance.c == 0.0 || !threshold.finite) return Policy::stop_at_once();
    return Policy::constant_threshold(threshold.u_star, threshold.s);
}

std::vector<double> vi_grid(const ThresholdResult& threshold, double lo,
                            double hi, std::size_t n, double exclusion) {
    std::vector<double> positive;
    positive.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0
                                : static_cast<double>(i) /
                                      static_cast<double>(n - 1);
        const double x = lo + t * (hi - lo);
        if (threshold.finite && std::abs(x - threshold.s) <= exclusion) continue;
        positive.push_back(x);
    }
    std::vector<double> grid;
    grid.reserve(2 * positive.size());
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
        grid.push_back(-*it);
    }
    grid.insert(grid.end(), positive.begin(), positive.end());
    return grid;
}

namespace {

VIReport assemble_vi_report(const ValueFunction& vf,
                            std::span<const double> grid, double tol,
                            const std::function<double(double)>& r2_at) {
    VIReport report;
    report.grid.assign(grid.begin(), grid.end());
    report.tol = tol;
    report.r1.reserve(grid.size());
    report.r2.reserve(grid.size());
    report.r3.reserve(grid.size());
    const ProblemInstance& inst = vf.instance();
    double min_r1 = std::numeric_limits<double>::infinity();
    double min_r2 = std::numeric_limits<double>::infinity();
    double max_r3 = 0.0;
    for (double x : grid) {
        const double r1 = inst.k(x) - vf(x);
        const double r2 = r2_at(x);
        const double r3 = r1 * r2 / std::max({1.0, std::abs(r1), std::abs(r2)});
        report.r1.push_back(r1);
        report.r2.push_back(r2);
        report.r3.push_back(r3);
        min_r1 = std::min(min_r1, r1);
        min_r2 = std::min(min_r2, r2);
        max_r3 = std::max(max_r3, std::abs(r3));
    }
    report.min_r1 = min_r1;
    report.min_r2 = min_r2;
    report.max_r3_scaled = max_r3;
    report.pass = min_r1 >= -tol && min_r2 >= -tol && max_r3 <= tol;
    return report;
}

}  // namespace

VIReport check_variational_inequalities(const ValueFunction& vf,
                                        std::span<const double> grid,
                                        double tol) {
    const ProblemInstance& inst = vf.instance();
    const ConjugatePair conj(inst.running);
    return assemble_vi_report(vf, grid, tol, [&](double x) {
        const double vpp = vf.second_derivative(x);
        const double sg = inst.sigma(x);
        const double w = inst.mu(x) * vf.derivative(x);  // eta is even
        return 0.5 * vpp * sg * sg + conj.eta(w) + inst.c;
    });
}

VIReport check_variational_inequalities_variance(const ValueFunction& vf,
                                                 std::span<const double> grid,
                                                 double tol) {
    const ProblemInstance& inst = vf.instance();
    if (inst.drift.kind != DriftKind::Constant || inst.drift.m != 1.0) {
        throw std::invalid_argument(
            "variance-control variational inequalities require drift mu == 1");
    }
    const ConjugatePair conj(inst.running);
    return assemble_vi_report(vf, grid, tol, [&](double x) {
        const double a = 0.5 * vf.second_derivative(x) * inst.sigma(x) *
                         inst.sigma(x);
        const double b = vf.derivative(x);
        // g(u) = a u^2 + b u + psi(u) is strictly convex here (a >= 0), so the
        // minimizer is the root of the increasing derivative.
        double u_min = 0.0;
        if (b != 0.0 || a < 0.0) {
            auto g_prime = [&](double u) {
                return 2.0 * a * u + b + inst.psi_prime(u);
            };
            u_min = solve_increasing(g_prime, conj.xi(-b), 1e-13);
        }
        const double g_min = a * u_min * u_min + b * u_min + inst.psi(u_min);
        return g_min + inst.c;
    });
}

}  // namespace dstop
