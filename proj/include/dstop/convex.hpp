#pragma once

#include "dstop/problem.hpp"

namespace dstop {

/// Conjugacy machinery for the running cost: xi = (psi')^{-1} and the
/// pointwise-minimized Hamiltonian eta(z) = min_u [u z + psi(u)].
/// xi is odd and strictly increasing; eta is even, eta(0) = 0, and strictly
/// decreasing on (0, inf) with eta'(z) = xi(-z).
class ConjugatePair {
public:
    explicit ConjugatePair(RunningCostFamily running);

    /// Inverse of psi' (closed form for both supported families).
    double xi(double z) const;

    /// Bracketed monotone root-find fallback for xi, kept as an independent
    /// route and tested against the closed forms. Absolute tolerance 1e-12.
    double xi_numeric(double z) const;

    /// eta(z) = z xi(-z) + psi(xi(-z)).
    double eta(double z) const;

    /// |central difference of eta at z with step h  -  xi(-z)|.
    double eta_derivative_residual(double z, double h) const;

    double psi(double u) const { return running_.value(u); }
    double psi_prime(double u) const { return running_.derivative(u); }
    const RunningCostFamily& running() const { return running_; }

private:
    RunningCostFamily running_;
};

}  // namespace dstop
