#include "dstop/problem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "dstop/errors.hpp"

namespace dstop {

namespace {

double pow_abs(double x, double e) {
    const double ax = std::abs(x);
    if (e == 1.0) return ax;
    if (e == 2.0) return ax * ax;
    return std::pow(ax, e);
}

}  // namespace

DriftFamily DriftFamily::constant(double m) {
    if (!(m > 0.0)) throw config_error("drift constant m must be positive");
    DriftFamily f;
    f.kind = DriftKind::Constant;
    f.m = m;
    return f;
}

DriftFamily DriftFamily::power(double a, double scale) {
    if (!(a >= 1.0)) throw config_error("drift power exponent a must be >= 1");
    if (!(scale > 0.0)) throw config_error("drift power scale must be positive");
    DriftFamily f;
    f.kind = DriftKind::Power;
    f.a = a;
    f.scale = scale;
    return f;
}

double DriftFamily::value(double x) const {
    return kind == DriftKind::Constant ? m : scale * pow_abs(x, a);
}

double DriftFamily::derivative(double x) const {
    if (kind == DriftKind::Constant) return 0.0;
    return scale * a * pow_abs(x, a - 1.0);
}

DispersionFamily DispersionFamily::constant(double sigma0) {
    if (!(sigma0 > 0.0)) throw config_error("dispersion sigma0 must be positive");
    DispersionFamily f;
    f.kind = DispersionKind::Constant;
    f.sigma0 = sigma0;
    return f;
}

DispersionFamily DispersionFamily::power(double b, double scale) {
    if (!(scale > 0.0)) throw config_error("dispersion power scale must be positive");
    DispersionFamily f;
    f.kind = DispersionKind::Power;
    f.b = b;
    f.scale = scale;
    return f;
}

double DispersionFamily::value(double x) const {
    return kind == DispersionKind::Constant ? sigma0 : scale * pow_abs(x, b);
}

bool DispersionFamily::structurally_bounded() const {
    return kind == DispersionKind::Constant || b == 0.0;
}

TerminalCostFamily TerminalCostFamily::quadratic(double kappa) {
    if (!(kappa > 0.0)) throw config_error("terminal quadratic kappa must be positive");
    TerminalCostFamily f;
    f.kind = TerminalCostKind::Quadratic;
    f.kappa = kappa;
    return f;
}

TerminalCostFamily TerminalCostFamily::log_cosh(double kappa) {
    if (!(kappa > 0.0)) throw config_error("terminal logcosh kappa must be positive");
    TerminalCostFamily f;
    f.kind = TerminalCostKind::LogCosh;
    f.kappa = kappa;
    return f;
}

TerminalCostFamily TerminalCostFamily::even_poly(std::vector<double> coeffs) {
    if (coeffs.empty()) throw config_error("terminal even_poly needs at least the x^2 coefficient");
    // Sign and convexity are not enforced here; verify_assumptions flags them.
    TerminalCostFamily f;
    f.kind = TerminalCostKind::EvenPoly;
    f.coeffs = std::move(coeffs);
    return f;
}

double TerminalCostFamily::value(double x) const {
    switch (kind) {
        case TerminalCostKind::Quadratic:
            return kappa * x * x;
        case TerminalCostKind::LogCosh: {
            // log cosh x = |x| + log1p(e^{-2|x|}) - log 2, overflow-safe.
            const double ax = std::abs(x);
            return kappa * (ax + std::log1p(std::exp(-2.0 * ax)) - M_LN2);
        }
        case TerminalCostKind::EvenPoly: {
            const double t = x * x;
            double acc = 0.0;
            for (std::size_t j = coeffs.size(); j-- > 0;) {
                acc = acc * t + coeffs[j];
            }
            return acc * t;
        }
    }
    return 0.0;
}

double TerminalCostFamily::derivative(double x) const {
    switch (kind) {
        case TerminalCostKind::Quadratic:
            return 2.0 * kappa * x;
        case TerminalCostKind::LogCosh:
            return kappa * std::tanh(x);
        case TerminalCostKind::EvenPoly: {
            const double t = x * x;
            double acc = 0.0;
            for (std::size_t j = coeffs.size(); j-- > 0;) {
                acc = acc * t + 2.0 * static_cast<double>(j + 1) * coeffs[j];
            }
            return acc * x;
        }
    }
    return 0.0;
}

double TerminalCostFamily::second_derivative(double x) const {
    switch (kind) {
        case TerminalCostKind::Quadratic:
            return 2.0 * kappa;
        case TerminalCostKind::LogCosh: {
            const double ax = std::abs(x);
            const double sech = 2.0 * std::exp(-ax) / (1.0 + std::exp(-2.0 * ax));
            return kappa * sech * sech;
        }
        case TerminalCostKind::EvenPoly: {
            const double t = x * x;
            double acc = 0.0;
            for (std::size_t j = coeffs.size(); j-- > 0;) {
                const double n = 2.0 * static_cast<double>(j + 1);
                acc = acc * t + n * (n - 1.0) * coeffs[j];
            }
            return acc;
        }
    }
    return 0.0;
}

RunningCostFamily RunningCostFamily::quadratic(double beta) {
    if (!(beta > 0.0)) throw config_error("running quadratic beta must be positive");
    RunningCostFamily f;
    f.kind = RunningCostKind::Quadratic;
    f.beta = beta;
    return f;
}

RunningCostFamily RunningCostFamily::even_power(double beta, double p) {
    if (!(beta > 0.0)) throw config_error("running even_power beta must be positive");
    if (!(p >= 2.0)) throw config_error("running even_power exponent p must be >= 2");
    RunningCostFamily f;
    f.kind = RunningCostKind::EvenPower;
    f.beta = beta;
    f.p = p;
    return f;
}

double RunningCostFamily::value(double u) const {
    if (kind == RunningCostKind::Quadratic) return beta * u * u;
    return beta * pow_abs(u, p);
}

double RunningCostFamily::derivative(double u) const {
    if (kind == RunningCostKind::Quadratic) return 2.0 * beta * u;
    return std::copysign(beta * p * pow_abs(u, p - 1.0), u);
}

double RunningCostFamily::second_derivative(double u) const {
    if (kind == RunningCostKind::Quadratic) return 2.0 * beta;
    return beta * p * (p - 1.0) * pow_abs(u, p - 2.0);
}

ProblemInstance with_operating_cost(ProblemInstance instance, double c) {
    if (!(c >= 0.0)) throw config_error("operating cost c must be >= 0");
    instance.c = c;
    return instance;
}

std::vector<double> assumption_grid() {
    constexpr std::size_t n = 2000;
    const double lo = std::log(1e-3);
    const double hi = std::log(1e2);
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        grid[i] = std::exp(lo + t * (hi - lo));
    }
    grid.front() = 1e-3;
    grid.back() = 1e2;
    return grid;
}

double infer_A(const DriftFamily& drift, const DispersionFamily& dispersion,
               std::span<const double> grid, double rel_tol) {
    if (grid.empty()) throw config_error("infer_A requires a nonempty grid");
    std::vector<double> ratios;
    ratios.reserve(grid.size());
    for (double x : grid) {
        if (!(x > 0.0)) throw config_error("infer_A grid must be strictly positive");
        const double mu = drift.value(x);
        const double sg = dispersion.value(x);
        ratios.push_back(drift.derivative(x) * sg * sg / (mu * mu));
    }
    std::vector<double> sorted = ratios;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double A = sorted[sorted.size() / 2];
    const double scale = std::max(1.0, std::abs(A));
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (std::abs(ratios[i] - A) > rel_tol * scale) {
            throw config_error(
                "no constant A satisfies mu' sigma^2 = A mu^2 for this "
                "drift/dispersion pair (ratio varies across the grid)");
        }
    }
    return std::max(A, 0.0);
}

ProblemInstance build_problem(const DriftFamily& drift,
                              const DispersionFamily& dispersion,
                              const TerminalCostFamily& terminal,
                              const RunningCostFamily& running, double c) {
    if (!(c >= 0.0)) throw config_error("operating cost c must be >= 0");
    const std::vector<double> grid = assumption_grid();
    ProblemInstance instance{drift, dispersion, terminal, running, c, 0.0};
    instance.A = infer_A(drift, dispersion, grid);
    return instance;
}

bool AssumptionReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const AssumptionCheck& c) { return c.pass; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

double central_second_difference(const std::function<double(double)>& f,
                                 double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace

AssumptionReport verify_assumptions(const ProblemInstance& instance,
                                    std::span<const double> grid, double tol,
                                    bool include_variance_control) {
    AssumptionReport report;
    report.grid.assign(grid.begin(), grid.end());

    const double x_max = *std::max_element(grid.begin(), grid.end());

    // A1: mu even, positive, differentiable on (0, inf), nondecreasing.
    {
        AssumptionCheck c{"A1", true, 0.0, "mu even, positive, mu' >= 0"};
        for (double x : grid) {
            c.worst_residual = std::max(
                c.worst_residual, std::abs(instance.mu(x) - instance.mu(-x)));
            if (!(instance.mu(x) > 0.0)) c.pass = false;
            if (instance.mu_prime(x) < -tol) c.pass = false;
        }
        if (c.worst_residual > tol) c.pass = false;
        report.checks.push_back(c);
    }

    // A2: sigma even, continuous, bounded away from zero on the grid.
    {
        AssumptionCheck c{"A2", true, 0.0, "sigma even, positive on grid"};
        for (double x : grid) {
            c.worst_residual = std::max(
                c.worst_residual,
                std::abs(instance.sigma(x) - instance.sigma(-x)));
            if (!(instance.sigma(x) > 0.0)) c.pass = false;
        }
        if (c.worst_residual > tol) c.pass = false;
        report.checks.push_back(c);
    }

    // A3: integrability of the drift and dispersion terms along paths. With
    // constant controls and locally bounded closed-form coefficients this
    // holds structurally.
    report.checks.push_back(
        {"A3", true, 0.0, "structural for constant controls and closed families"});

    // A4: mu' sigma^2 = A mu^2 on the grid.
    {
        AssumptionCheck c{"A4", true, 0.0, "coefficient relation residual"};
        for (double x : grid) {
            const double mu = instance.mu(x);
            const double sg = instance.sigma(x);
            const double res =
                std::abs(instance.mu_prime(x) * sg * sg - instance.A * mu * mu) /
                std::max(1.0, mu * mu);
            c.worst_residual = std::max(c.worst_residual, res);
        }
        c.pass = c.worst_residual <= tol && instance.A >= 0.0;
        report.checks.push_back(c);
    }

    // A5: A = 0 needs bounded sigma; A > 0 needs mu' bounded away from zero.
    {
        AssumptionCheck c{"A5", true, 0.0, ""};
        if (instance.A == 0.0) {
            c.note = "A = 0: sigma bounded";
            c.pass = instance.dispersion.structurally_bounded();
        } else {
            c.note = "A > 0: inf mu' over grid";
            double inf_mu_prime = instance.mu_prime(grid.front());
            for (double x : grid) {
                inf_mu_prime = std::min(inf_mu_prime, instance.mu_prime(x));
            }
            c.worst_residual = inf_mu_prime;
            c.pass = inf_mu_prime > 0.0;
        }
        report.checks.push_back(c);
    }

    // A6: k and psi nonnegative, even, C^2, strictly convex; psi(0) = 0.
    {
        AssumptionCheck c{"A6", true, 0.0, "cost convexity and symmetry"};
        if (std::abs(instance.psi(0.0)) > tol) c.pass = false;
        const double h = 1e-4;
        for (double x : grid) {
            const double k_even = std::abs(instance.k(x) - instance.k(-x));
            const double p_even = std::abs(instance.psi(x) - instance.psi(-x));
            c.worst_residual = std::max({c.worst_residual, k_even, p_even});
            if (instance.k(x) < 0.0 || instance.psi(x) < 0.0) c.pass = false;
            if (!(instance.k_second(x) > 0.0)) c.pass = false;
            if (!(instance.running.second_derivative(x) > 0.0)) c.pass = false;
            // Convexity cross-checked by a second central difference at
            // moderate abscissae. The threshold absorbs cancellation noise
            // (~eps |k| / h^2) where k'' is tiny but positive.
            if (x >= 0.1 && x <= 5.0) {
                const double fd = central_second_difference(
                    [&](double y) { return instance.k(y); }, x, h);
                if (fd <= -1e-6 * std::max(1.0, std::abs(instance.k(x)))) {
                    c.pass = false;
                }
            }
        }
        if (c.worst_residual > tol) c.pass = false;
        report.checks.push_back(c);
    }

    // A7: psi' diverges. Checked as strict growth at the top of the grid plus
    // a doubling test past the grid; a bounded psi' fails.
    {
        AssumptionCheck c{"A7", true, 0.0, "psi' divergence"};
        const double at_max = instance.psi_prime(x_max);
        const double at_half = instance.psi_prime(0.5 * x_max);
        const double beyond = instance.psi_prime(10.0 * x_max);
        c.worst_residual = at_max;
        c.pass = at_max > 0.0 && at_max > at_half && beyond >= 2.0 * at_max;
        report.checks.push_back(c);
    }

    if (include_variance_control) {
        // A8: super-quadratic running cost (the bounded-control branch holds
        // automatically for constant controls).
        AssumptionCheck c{"A8", true, 0.0, "psi super-quadratic"};
        const double r_half = instance.psi(0.5 * x_max) / (0.25 * x_max * x_max);
        const double r_max = instance.psi(x_max) / (x_max * x_max);
        c.worst_residual = r_max;
        c.pass = r_max > 0.0 && r_max >= 0.99 * r_half;
        report.checks.push_back(c);
    }

    return report;
}

}  // namespace dstop
