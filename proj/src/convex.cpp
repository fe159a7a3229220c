#include "dstop/convex.hpp"

#include <cmath>

#include "dstop/errors.hpp"
#include "dstop/numerics.hpp"

namespace dstop {

ConjugatePair::ConjugatePair(RunningCostFamily running) : running_(running) {}

double ConjugatePair::xi(double z) const {
    switch (running_.kind) {
        case RunningCostKind::Quadratic:
            return z / (2.0 * running_.beta);
        case RunningCostKind::EvenPower: {
            if (z == 0.0) return 0.0;
            const double mag = std::pow(
                std::abs(z) / (running_.beta * running_.p),
                1.0 / (running_.p - 1.0));
            return std::copysign(mag, z);
        }
    }
    return 0.0;
}

double ConjugatePair::xi_numeric(double z) const {
    if (z == 0.0) return 0.0;
    // psi' is odd and strictly increasing to +-inf; expand a one-sided
    // bracket on the side of z, then refine.
    double hi = std::copysign(1.0, z);
    std::size_t doublings = 0;
    while ((z > 0.0) ? running_.derivative(hi) < z : running_.derivative(hi) > z) {
        hi *= 2.0;
        if (++doublings > 1000) {
            throw solver_error("xi bracket expansion exhausted (psi' fails to diverge)");
        }
    }
    double lo = 0.0;
    auto f = [&](double u) { return running_.derivative(u) - z; };
    if (z < 0.0) std::swap(lo, hi);
    return brent(f, lo, hi, f(lo), f(hi), 1e-12);
}

double ConjugatePair::eta(double z) const {
    const double u = xi(-z);
    return z * u + running_.value(u);
}

double ConjugatePair::eta_derivative_residual(double z, double h) const {
    const double fd = (eta(z + h) - eta(z - h)) / (2.0 * h);
    return std::abs(fd - xi(-z));
}

}  // namespace dstop
