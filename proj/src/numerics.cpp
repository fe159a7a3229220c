#include "dstop/numerics.hpp"

#include <cmath>
#include <limits>

#include "dstop/errors.hpp"

namespace dstop {

namespace {

constexpr std::size_t kSubdivisionCap = 1'000'000;

double simpson(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa,
             double m, double fm, double b, double fb, double whole,
             double tol, int depth, std::size_t& intervals) {
    if (++intervals > kSubdivisionCap) {
        throw solver_error("adaptive quadrature exceeded the subdivision cap");
    }
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (depth <= 0) {
        throw solver_error("adaptive quadrature failed to converge");
    }
    if (std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adapt(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, intervals) +
           adapt(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, intervals);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, abs_tol);
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = simpson(fa, fm, fb, b - a);
    std::size_t intervals = 0;
    return adapt(f, a, fa, m, fm, b, fb, whole, abs_tol, 60, intervals);
}

TailIntegral integrate_to_infinity(const std::function<double(double)>& f,
                                   double a, double x_max, double abs_tol) {
    if (a <= 0.0) throw solver_error("integrate_to_infinity requires a > 0");
    TailIntegral out;
    double lo = a;
    double prev_chunk = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    while (lo < x_max) {
        const double hi = std::min(2.0 * lo, x_max);
        const double chunk = integrate(f, lo, hi, abs_tol);
        out.value += chunk;
        if (std::abs(chunk) <= abs_tol) {
            out.tail_bound = std::abs(chunk);
            return out;
        }
        if (std::abs(chunk) >= std::abs(prev_chunk)) {
            if (++growth_streak >= 3) {
                throw solver_error("divergent tail detected in improper integral");
            }
        } else {
            growth_streak = 0;
        }
        prev_chunk = chunk;
        lo = hi;
    }
    // Truncated at x_max: bound the remainder by a geometric extrapolation of
    // the last chunk ratio (valid for eventually geometrically decaying tails).
    out.truncated = true;
    const double last = std::abs(prev_chunk);
    const double probe = std::abs(integrate(f, x_max, 2.0 * x_max, abs_tol));
    const double ratio = last > 0.0 ? probe / last : 0.0;
    if (ratio >= 1.0) {
        throw solver_error("divergent tail detected at the truncation limit");
    }
    out.tail_bound = probe / (1.0 - ratio);
    return out;
}

RootBracket expand_bracket(const std::function<double(double)>& f, double x0,
                           std::size_t max_doublings) {
    double step = std::max(0.5 * std::abs(x0), 0.5);
    double lo = x0;
    double hi = x0;
    double f_lo = f(x0);
    double f_hi = f_lo;
    if (f_lo == 0.0) return {x0, x0, 0.0, 0.0};
    for (std::size_t i = 0; i < max_doublings; ++i) {
        const double left = lo - step;
        const double f_left = f(left);
        if (f_left == 0.0) return {left, left, 0.0, 0.0};
        if (std::signbit(f_left) != std::signbit(f_lo)) {
            return {left, lo, f_left, f_lo};
        }
        lo = left;
        f_lo = f_left;

        const double right = hi + step;
        const double f_right = f(right);
        if (f_right == 0.0) return {right, right, 0.0, 0.0};
        if (std::signbit(f_right) != std::signbit(f_hi)) {
            return {hi, right, f_hi, f_right};
        }
        hi = right;
        f_hi = f_right;
        step *= 2.0;
    }
    throw solver_error("failed to bracket a root within the doubling budget");
}

double brent(const std::function<double(double)>& f, double lo, double hi,
             double f_lo, double f_hi, double x_tol, double f_tol,
             std::size_t max_iter) {
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if (std::signbit(f_lo) == std::signbit(f_hi)) {
        throw solver_error("brent called without a sign change");
    }
    double a = lo, b = hi, fa = f_lo, fb = f_hi;
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() *
                                std::abs(b) + 0.5 * x_tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= f_tol) {
            return b;
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if (std::abs(d) > tol1) {
            b += d;
        } else {
            b += std::copysign(tol1, xm);
        }
        fb = f(b);
        if (std::signbit(fb) == std::signbit(fc)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    throw solver_error("brent failed to converge");
}

double solve_increasing(const std::function<double(double)>& f, double x0,
                        double x_tol, double f_tol) {
    const RootBracket br = expand_bracket(f, x0);
    if (br.lo == br.hi) return br.lo;
    return brent(f, br.lo, br.hi, br.f_lo, br.f_hi, x_tol, f_tol);
}

}  // namespace dstop
