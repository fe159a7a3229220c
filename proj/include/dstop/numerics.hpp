#pragma once

#include <cstddef>
#include <functional>

namespace dstop {

/// Adaptive Simpson quadrature of f over [a, b] to the given absolute
/// tolerance. Orientation-aware: a > b yields the negated integral.
/// Throws solver_error once the subdivision cap (1e6 intervals) is hit.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

struct TailIntegral {
    double value = 0.0;       // integral over [a, truncation point]
    double tail_bound = 0.0;  // geometric estimate of the remainder
    bool truncated = false;   // hit x_max before the chunks became negligible
};

/// Integrates f over [a, infinity) by summing octave chunks [a·2^k, a·2^{k+1}]
/// until they fall below abs_tol or the upper limit reaches x_max.
/// Requires a > 0. Throws solver_error when the chunk sequence fails to decay
/// (divergent tail).
TailIntegral integrate_to_infinity(const std::function<double(double)>& f,
                                   double a, double x_max = 1e6,
                                   double abs_tol = 1e-12);

struct RootBracket {
    double lo = 0.0;
    double hi = 0.0;
    double f_lo = 0.0;
    double f_hi = 0.0;
};

/// Expands geometrically around x0 (both directions, factor 2) until f changes
/// sign. Throws solver_error after max_doublings without a sign change.
RootBracket expand_bracket(const std::function<double(double)>& f, double x0,
                           std::size_t max_doublings = 1000);

/// Brent's method on a bracketing interval. Stops when the interval shrinks to
/// x_tol (plus machine slack) or |f| <= f_tol.
double brent(const std::function<double(double)>& f, double lo, double hi,
             double f_lo, double f_hi, double x_tol = 1e-14,
             double f_tol = 0.0, std::size_t max_iter = 200);

/// Root of a strictly increasing function via expand_bracket + brent.
double solve_increasing(const std::function<double(double)>& f, double x0,
                        double x_tol = 1e-14, double f_tol = 0.0);

}  // namespace dstop
