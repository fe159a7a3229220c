#include <cmath>
#include <vector>

#include <doctest.h>

#include "dstop/errors.hpp"
#include "dstop/solver.hpp"

using namespace dstop;

namespace {

ProblemInstance qc_instance(double c = 1.0) {
    return build_problem(DriftFamily::constant(1.0),
                         DispersionFamily::constant(1.0),
                         TerminalCostFamily::quadratic(1.0),
                         RunningCostFamily::quadratic(1.0), c);
}

ProblemInstance geo_instance(double c = 1.0) {
    return build_problem(DriftFamily::power(1.0, 1.0),
                         DispersionFamily::power(1.0, 1.0),
                         TerminalCostFamily::quadratic(1.0),
                         RunningCostFamily::quadratic(1.0), c);
}

ProblemInstance logcosh_instance(double c = 0.5) {
    return build_problem(DriftFamily::constant(1.0),
                         DispersionFamily::constant(1.0),
                         TerminalCostFamily::log_cosh(1.0),
                         RunningCostFamily::quadratic(1.0), c);
}

// Independent root of the threshold equation for the proportional instance:
// with w = 2 s^2 the equation becomes w^2 + 2w - 4c = 0.
double geo_threshold_oracle(double c) {
    const double w = -1.0 + std::sqrt(1.0 + 4.0 * c);
    return std::sqrt(0.5 * w);
}

}  // namespace

TEST_CASE("zeta at hand-checked points") {
    CHECK(zeta(qc_instance(), 1.0) == doctest::Approx(-1.0));   // -(2z)^2/4
    CHECK(zeta(geo_instance(), 1.0) == doctest::Approx(-2.0));  // -z^4 - z^2 at 1
    CHECK(std::abs(zeta(qc_instance(), 1e-8)) <= 1e-7);         // eta(0) = 0
}

TEST_CASE("all-quadratic threshold in closed form: s = sqrt(c)") {
    for (double c : {0.25, 1.0, 4.0}) {
        const ThresholdResult tr = solve_threshold(qc_instance(c));
        REQUIRE(tr.finite);
        const double root_c = std::sqrt(c);
        CHECK(std::abs(tr.s - root_c) <= 1e-10);
        CHECK(tr.gamma == doctest::Approx(2.0 * root_c).epsilon(1e-12));
        CHECK(tr.b == doctest::Approx(c).epsilon(1e-12));
        CHECK(tr.u_star == doctest::Approx(-root_c).epsilon(1e-12));
        CHECK(tr.residual <= 1e-12 * std::max(1.0, c));
        CHECK(tr.u_star < 0.0);
        CHECK(tr.gamma > 0.0);
    }
}

TEST_CASE("proportional instance threshold against the quadratic-in-w oracle") {
    const ProblemInstance geo = geo_instance(1.0);
    const ThresholdResult tr = solve_threshold(geo);
    REQUIRE(tr.finite);
    CHECK(std::abs(tr.s - geo_threshold_oracle(1.0)) <= 1e-9);
    CHECK(std::abs(tr.s - 0.7861514) <= 1e-6);
    CHECK(std::abs(zeta(geo, tr.s) + 1.0) <= 1e-12);
    CHECK(tr.u_star == doctest::Approx(-0.6180340).epsilon(1e-6));
}

TEST_CASE("bounded zeta yields an infinite threshold") {
    // log-cosh terminal cost: zeta(z) = -tanh(z)^2 / 4 > -1/4 > -c
    const ThresholdResult tr = solve_threshold(logcosh_instance(0.5));
    CHECK_FALSE(tr.finite);
    CHECK(std::isinf(tr.s));
}

TEST_CASE("threshold solve rejects nonpositive operating cost") {
    CHECK_THROWS_AS(solve_threshold(qc_instance(0.0)), std::invalid_argument);
}

TEST_CASE("value function at hand-checked points") {
    const ProblemInstance qc = qc_instance(1.0);
    const ValueFunction vf(qc);
    CHECK(vf(2.0) == doctest::Approx(3.0).epsilon(1e-10));   // 2 sqrt(c) x - c
    CHECK(vf(0.5) == 0.25);                                  // inside: k(x)
    CHECK(vf(-2.0) == vf(2.0));
    CHECK(vf(1.0) == doctest::Approx(1.0).epsilon(1e-12));   // continuity at s
}

TEST_CASE("proportional value agrees with the logarithmic closed form") {
    const ProblemInstance geo = geo_instance(1.0);
    const ValueFunction vf(geo);
    const double s = vf.threshold().s;
    const double expected = s * s + 2.0 * s * s * std::log(2.0 / s);
    CHECK(vf(2.0) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(vf(2.0) - 1.7722) <= 5e-4);
}

TEST_CASE("zero operating cost collapses the value to k(0)") {
    const ValueFunction vf(qc_instance(0.0));
    CHECK(vf.zero_cost_degenerate());
    for (double x : {0.0, 1.0, 5.0, -3.0}) {
        CHECK(vf(x) == 0.0);
    }
}

TEST_CASE("infinite threshold collapses the value to k") {
    const ProblemInstance inst = logcosh_instance(0.5);
    const ValueFunction vf(inst);
    for (double x : {0.2, 1.0, 3.0, -2.0}) {
        CHECK(vf(x) == inst.k(x));
    }
}

TEST_CASE("V <= k with equality exactly inside the stopping interval") {
    for (const ProblemInstance& inst : {qc_instance(1.0), geo_instance(1.0)}) {
        const ValueFunction vf(inst);
        const double s = vf.threshold().s;
        for (double x = 0.05; x <= 4.0; x += 0.05) {
            if (std::abs(x - s) < 1e-9) continue;  // knife-edge rounding
            const double gap = inst.k(x) - vf(x);
            if (x <= s) {
                CHECK(gap == 0.0);
            } else {
                CHECK(gap > 0.0);
            }
        }
    }
}

TEST_CASE("smooth fit at the free boundary") {
    CHECK(ValueFunction(qc_instance(1.0)).smooth_fit_residual() <= 1e-6);
    CHECK(ValueFunction(geo_instance(1.0)).smooth_fit_residual() <= 1e-6);
}

TEST_CASE("threshold grows strictly with the operating cost") {
    for (const auto& make : {&qc_instance, &geo_instance}) {
        double prev = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double c = 0.1 * std::pow(10.0, i / 19.0 * 2.0);
            const ThresholdResult tr = solve_threshold(make(c));
            REQUIRE(tr.finite);
            CHECK(tr.s > prev);
            prev = tr.s;
        }
    }
}

TEST_CASE("expected-cost chain reproduces the value function above s") {
    for (const ProblemInstance& inst : {qc_instance(1.0), geo_instance(1.0)}) {
        const ValueFunction vf(inst);
        const ThresholdResult& tr = vf.threshold();
        for (double x : {1.5, 2.0, 3.0, 4.5}) {
            const double chain =
                inst.k(tr.s) + (inst.c + inst.psi(tr.u_star)) * 2.0 /
                                   (inst.A - 2.0 * tr.u_star) *
                                   inverse_drift_integral(inst, tr.s, x);
            CHECK(std::abs(chain - vf(x)) <= 1e-8);
        }
    }
}

TEST_CASE("optimal policy construction") {
    const ProblemInstance qc = qc_instance(1.0);
    const Policy p = optimal_policy(qc, solve_threshold(qc));
    CHECK_FALSE(p.stops_at_once());
    CHECK(p.u == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(p.s == doctest::Approx(1.0).epsilon(1e-12));

    const ProblemInstance lc = logcosh_instance(0.5);
    CHECK(optimal_policy(lc, solve_threshold(lc)).stops_at_once());

    ThresholdResult dummy;
    dummy.finite = true;
    dummy.s = 1.0;
    dummy.u_star = -1.0;
    CHECK(optimal_policy(qc_instance(0.0), dummy).stops_at_once());
}

TEST_CASE("variational inequalities hold for the solved value function") {
    for (const ProblemInstance& inst : {qc_instance(1.0), geo_instance(1.0)}) {
        const ValueFunction vf(inst);
        const ThresholdResult& tr = vf.threshold();
        const std::vector<double> grid = vi_grid(tr, 0.01, 5.0 * tr.s, 4000);
        const VIReport report = check_variational_inequalities(vf, grid, 1e-8);
        CHECK(report.pass);
        CHECK(report.min_r1 >= -1e-8);
        CHECK(report.min_r2 >= -1e-8);
        CHECK(report.max_r3_scaled <= 1e-8);
        // outside the stopping region the generator residual vanishes
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (std::abs(grid[i]) > tr.s) {
                CHECK(std::abs(report.r2[i]) <= 1e-10);
            }
        }
    }
}

TEST_CASE("generator residual at a hand point inside the stopping region") {
    const ValueFunction vf(qc_instance(1.0));
    const std::vector<double> grid{-0.5, 0.5};
    const VIReport report = check_variational_inequalities(vf, grid, 1e-8);
    // r2 = k''/2 + eta(2 * 0.5) + c = 1 - 0.25 + 1
    CHECK(report.r2[0] == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(report.r2[1] == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(report.r1[0] == 0.0);
}

TEST_CASE("with an infinite threshold V = k satisfies the inequalities") {
    const ProblemInstance inst = logcosh_instance(0.5);
    const ValueFunction vf(inst);
    const std::vector<double> grid = vi_grid(vf.threshold(), 0.01, 5.0, 2000);
    const VIReport report = check_variational_inequalities(vf, grid, 1e-8);
    CHECK(report.pass);
    for (double r1 : report.r1) CHECK(r1 == 0.0);
    for (double r2 : report.r2) CHECK(r2 >= -1e-10);
}

TEST_CASE("variance-control inequalities for the unit-drift instance") {
    const ProblemInstance qc = qc_instance(1.0);
    const ValueFunction vf(qc);
    const std::vector<double> grid = vi_grid(vf.threshold(), 0.01, 5.0, 2000);
    const VIReport report =
        check_variational_inequalities_variance(vf, grid, 1e-8);
    CHECK(report.pass);

    const ProblemInstance geo = geo_instance(1.0);
    const ValueFunction gvf(geo);
    CHECK_THROWS_AS(
        check_variational_inequalities_variance(gvf, grid, 1e-8),
        std::invalid_argument);
}

TEST_CASE("vi grid is symmetric and avoids the boundary") {
    ThresholdResult tr;
    tr.finite = true;
    tr.s = 1.0;
    const std::vector<double> grid = vi_grid(tr, 0.01, 5.0, 1000);
    for (double x : grid) {
        CHECK(std::abs(std::abs(x) - tr.s) > 1e-6);
    }
    for (std::size_t i = 0; i < grid.size() / 2; ++i) {
        CHECK(grid[i] == -grid[grid.size() - 1 - i]);
    }
}

TEST_CASE("quadrature route matches the closed-form tail integral") {
    const ProblemInstance geo = geo_instance(1.0);
    const ValueFunction vf(geo);
    const double s = vf.threshold().s;
    for (double x : {1.0, 2.0, 3.5}) {
        CHECK(vf.tail_integral(x) ==
              doctest::Approx(std::log(x / s)).epsilon(1e-10));
    }
}
