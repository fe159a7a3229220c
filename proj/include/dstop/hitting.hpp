#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "dstop/problem.hpp"

namespace dstop {

class InnerExponentCache;

/// Diffusion dX = u mu(X) dt + sigma(X) dW with constant u < 0, watched on
/// [s, infinity) with reference point d > s. Carries the scale-function and
/// speed-measure machinery for one-sided hitting times.
struct ScaleSpec {
    ProblemInstance instance;
    double u = -1.0;  // constant control, < 0
    double s = 1.0;   // lower threshold, > 0
    double d = 2.0;   // reference point, > s; results are d-invariant

    // Memoized antiderivative samples for the generic (no closed form) path.
    std::shared_ptr<InnerExponentCache> inner_cache;

    static ScaleSpec make(const ProblemInstance& instance, double u, double s,
                          double d);
};

/// p'(x) = exp{ -2 int_d^x u mu / sigma^2 }. Closed forms for
/// (Constant mu, Constant sigma) and for the coefficient-related power
/// families (p' = (mu(x)/mu(d))^{-2u/A}); memoized inner quadrature otherwise.
double scale_density(const ScaleSpec& spec, double x);

/// p(x) = int_d^x p'(xi) dxi for x >= s. Exact antiderivatives where the
/// density has a closed form, adaptive quadrature otherwise. Strictly
/// increasing with p(d) = 0; may overflow to +inf for astronomically large x.
double scale_value(const ScaleSpec& spec, double x);

/// Speed density 2 / (p'(x) sigma^2(x)).
double speed_density(const ScaleSpec& spec, double x);

/// m((a, b)) = int_a^b 2 / (p' sigma^2). Pass b = +infinity for the total
/// mass above a: closed forms where available, otherwise truncated quadrature
/// with the tail estimate written to *tail_bound. Divergent tails throw.
double speed_mass(const ScaleSpec& spec, double a, double b,
                  double* tail_bound = nullptr);

/// Expected one-sided hitting time of level s from x >= s under constant
/// control u < 0:  (2 / (A - 2u)) int_s^x dy / mu(y).
double expected_hitting_time(const ProblemInstance& instance, double u,
                             double s, double x);

/// Independent route via the scale/speed representation
///   E[tau] = -int_s^x (p(x) - p(y)) m(dy) + (p(x) - p(s)) m((s, inf)),
/// used solely to validate the closed form. d-invariant up to quadrature
/// tolerance.
double expected_hitting_time_oracle(const ProblemInstance& instance, double u,
                                    double s, double x, double d);

}  // namespace dstop
