#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dstop {

// Parametric coefficient and cost families. Closed forms only, so every
// derivative used by the solver is exact. Evenness is structural: values
// depend on |x|.

enum class DriftKind { Constant, Power };

struct DriftFamily {
    DriftKind kind = DriftKind::Constant;
    double m = 1.0;      // Constant level
    double a = 1.0;      // Power exponent, >= 1
    double scale = 1.0;  // Power scale, > 0

    static DriftFamily constant(double m);
    static DriftFamily power(double a, double scale);

    double value(double x) const;
    double derivative(double x) const;  // d/dx on (0, inf)
};

enum class DispersionKind { Constant, Power };

struct DispersionFamily {
    DispersionKind kind = DispersionKind::Constant;
    double sigma0 = 1.0;  // Constant level, > 0
    double b = 0.0;       // Power exponent
    double scale = 1.0;   // Power scale, > 0

    static DispersionFamily constant(double sigma0);
    static DispersionFamily power(double b, double scale);

    double value(double x) const;
    bool structurally_bounded() const;
};

enum class TerminalCostKind { Quadratic, LogCosh, EvenPoly };

struct TerminalCostFamily {
    TerminalCostKind kind = TerminalCostKind::Quadratic;
    double kappa = 1.0;           // Quadratic / LogCosh weight, > 0
    std::vector<double> coeffs;   // EvenPoly: k(x) = sum_j coeffs[j] x^{2(j+1)}

    static TerminalCostFamily quadratic(double kappa);
    static TerminalCostFamily log_cosh(double kappa);
    static TerminalCostFamily even_poly(std::vector<double> coeffs);

    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;
};

enum class RunningCostKind { Quadratic, EvenPower };

struct RunningCostFamily {
    RunningCostKind kind = RunningCostKind::Quadratic;
    double beta = 1.0;  // weight, > 0
    double p = 2.0;     // EvenPower exponent, >= 2

    static RunningCostFamily quadratic(double beta);
    static RunningCostFamily even_power(double beta, double p);

    double value(double u) const;
    double derivative(double u) const;
    double second_derivative(double u) const;
};

/// Immutable problem description consumed by every solver. `A` is the
/// coefficient tying drift and dispersion together (mu' sigma^2 = A mu^2);
/// it is inferred from the families at build time, never user-supplied.
struct ProblemInstance {
    DriftFamily drift;
    DispersionFamily dispersion;
    TerminalCostFamily terminal;
    RunningCostFamily running;
    double c = 1.0;  // operating cost per unit time, >= 0
    double A = 0.0;

    double mu(double x) const { return drift.value(x); }
    double mu_prime(double x) const { return drift.derivative(x); }
    double sigma(double x) const { return dispersion.value(x); }
    double k(double x) const { return terminal.value(x); }
    double k_prime(double x) const { return terminal.derivative(x); }
    double k_second(double x) const { return terminal.second_derivative(x); }
    double psi(double u) const { return running.value(u); }
    double psi_prime(double u) const { return running.derivative(u); }
};

/// Copy with a different operating cost (used by the constrained machinery).
ProblemInstance with_operating_cost(ProblemInstance instance, double c);

/// Default check grid: 2000 log-spaced points on [1e-3, 1e2].
std::vector<double> assumption_grid();

/// Median over the grid of mu'(x) sigma^2(x) / mu^2(x). Throws config_error
/// when the ratio's spread across the grid exceeds rel_tol (no constant A
/// satisfies the coefficient relation).
double infer_A(const DriftFamily& drift, const DispersionFamily& dispersion,
               std::span<const double> grid, double rel_tol = 1e-8);

/// Validates parameter ranges, infers A, and cross-checks the coefficient
/// relation on the default grid. Throws config_error on structural problems.
ProblemInstance build_problem(const DriftFamily& drift,
                              const DispersionFamily& dispersion,
                              const TerminalCostFamily& terminal,
                              const RunningCostFamily& running, double c);

struct AssumptionCheck {
    std::string name;        // "A1".."A7" (optionally "A8")
    bool pass = false;
    double worst_residual = 0.0;
    std::string note;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    std::vector<double> grid;

    bool all_pass() const;
    const AssumptionCheck* find(const std::string& name) const;
};

/// Checks every standing assumption on the grid by direct evaluation and
/// finite differences. Failures are recorded in the report, never thrown.
AssumptionReport verify_assumptions(const ProblemInstance& instance,
                                    std::span<const double> grid,
                                    double tol = 1e-8,
                                    bool include_variance_control = false);

}  // namespace dstop
