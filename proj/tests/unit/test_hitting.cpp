#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "dstop/hitting.hpp"
#include "dstop/numerics.hpp"
#include "dstop/solver.hpp"

using namespace dstop;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

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

// A = 0 with non-constant dispersion: exercises the generic (memoized
// quadrature) scale path. sigma(x) = x^{1/4}.
ProblemInstance generic_instance() {
    return build_problem(DriftFamily::constant(1.0),
                         DispersionFamily::power(0.25, 1.0),
                         TerminalCostFamily::quadratic(1.0),
                         RunningCostFamily::quadratic(1.0), 1.0);
}

}  // namespace

TEST_CASE("scale function vanishes at the reference point") {
    const ScaleSpec spec = ScaleSpec::make(qc_instance(), -1.0, 1.0, 2.0);
    CHECK(scale_value(spec, 2.0) == 0.0);
}

TEST_CASE("scale density closed forms at hand points") {
    const ScaleSpec qc = ScaleSpec::make(qc_instance(), -1.0, 1.0, 2.0);
    for (double x : {1.0, 1.5, 2.0, 3.0}) {
        CHECK(scale_density(qc, x) ==
              doctest::Approx(std::exp(2.0 * (x - 2.0))).epsilon(1e-13));
    }
    const ScaleSpec geo = ScaleSpec::make(geo_instance(), -1.0, 1.0, 2.0);
    for (double x : {1.0, 1.5, 2.0, 3.0}) {
        CHECK(scale_density(geo, x) ==
              doctest::Approx((x / 2.0) * (x / 2.0)).epsilon(1e-13));
    }
}

TEST_CASE("scale function is strictly increasing with p(d) = 0") {
    for (const ScaleSpec& spec :
         {ScaleSpec::make(qc_instance(), -1.0, 1.0, 2.0),
          ScaleSpec::make(geo_instance(), -0.7, 0.8, 1.8)}) {
        double prev = scale_value(spec, spec.s);
        for (double x = spec.s + 0.25; x < 4.0; x += 0.25) {
            const double cur = scale_value(spec, x);
            CHECK(cur > prev);
            prev = cur;
        }
        CHECK(scale_value(spec, spec.d) == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("generic scale path matches a hand-integrated exponent") {
    // mu = 1, sigma = x^{1/4}, u = -1: inner exponent 2 int_d^x z^{-1/2} dz
    //                                  = 4 (sqrt(x) - sqrt(d))
    const ScaleSpec spec = ScaleSpec::make(generic_instance(), -1.0, 1.0, 2.0);
    REQUIRE(spec.inner_cache != nullptr);
    for (double x : {1.0, 1.7, 2.6}) {
        const double expected =
            std::exp(4.0 * (std::sqrt(x) - std::sqrt(2.0)));
        CHECK(scale_density(spec, x) == doctest::Approx(expected).epsilon(1e-9));
    }
    const double p3 = scale_value(spec, 3.0);
    const double p3_direct = integrate(
        [&](double z) {
            return std::exp(4.0 * (std::sqrt(z) - std::sqrt(2.0)));
        },
        2.0, 3.0, 1e-12);
    CHECK(p3 == doctest::Approx(p3_direct).epsilon(1e-9));
}

TEST_CASE("speed mass over an empty interval is zero") {
    const ScaleSpec spec = ScaleSpec::make(qc_instance(), -1.0, 1.0, 2.0);
    CHECK(speed_mass(spec, 1.5, 1.5) == 0.0);
}

TEST_CASE("total speed mass closed form vs quadrature oracle") {
    // constant coefficients: m((s, inf)) = -(1/(u mu)) e^{2 u mu (s - d)} = e^2
    const ScaleSpec qc = ScaleSpec::make(qc_instance(), -1.0, 1.0, 2.0);
    const double qc_mass = speed_mass(qc, 1.0, kInf);
    CHECK(qc_mass == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
    const double qc_oracle = integrate(
        [&](double x) { return speed_density(qc, x); }, 1.0, 45.0, 1e-12);
    CHECK(qc_mass == doctest::Approx(qc_oracle).epsilon(1e-9));

    // proportional coefficients: m((s, inf)) = (2/(A-2u)) mu(d)^{-2u/A}
    //                                          mu(s)^{2u/A - 1} = (2/3) * 4 / s^3
    const ScaleSpec geo = ScaleSpec::make(geo_instance(), -1.0, 1.0, 2.0);
    const double geo_mass = speed_mass(geo, 1.0, kInf);
    CHECK(geo_mass == doctest::Approx(2.0 / 3.0 * 4.0).epsilon(1e-12));
    const double geo_oracle = integrate(
        [&](double x) { return speed_density(geo, x); }, 1.0, 4000.0, 1e-10);
    CHECK(geo_mass == doctest::Approx(geo_oracle).epsilon(1e-6));
}

TEST_CASE("generic total speed mass converges with a reported tail") {
    const ScaleSpec spec = ScaleSpec::make(generic_instance(), -1.0, 1.0, 2.0);
    double tail = -1.0;
    const double mass = speed_mass(spec, 1.0, kInf, &tail);
    CHECK(mass > 0.0);
    CHECK(std::isfinite(mass));
    CHECK(tail >= 0.0);
    CHECK(tail <= 1e-10);
}

TEST_CASE("expected hitting time closed form at hand points") {
    CHECK(expected_hitting_time(qc_instance(), -1.0, 1.0, 1.0) == 0.0);
    CHECK(expected_hitting_time(qc_instance(), -1.0, 1.0, 2.0) ==
          doctest::Approx(1.0).epsilon(1e-10));
    // proportional dynamics at the optimal pair for c = 1
    const double u = -0.6180339887498949;
    const double s = 0.7861513777574233;
    const double expected = 2.0 / (1.0 - 2.0 * u) * std::log(2.0 / s);
    CHECK(expected_hitting_time(geo_instance(), u, s, 2.0) ==
          doctest::Approx(expected).epsilon(1e-10));
    CHECK(std::abs(expected - 0.8352) <= 1e-4);
}

TEST_CASE("hitting time requires a negative control") {
    CHECK_THROWS_AS(expected_hitting_time(qc_instance(), 0.5, 1.0, 2.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(expected_hitting_time(qc_instance(), -1.0, 2.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(ScaleSpec::make(qc_instance(), 1.0, 1.0, 2.0),
                    std::invalid_argument);
}

TEST_CASE("scale/speed oracle agrees with the closed form") {
    CHECK(expected_hitting_time_oracle(qc_instance(), -1.0, 1.0, 1.0, 3.0) ==
          doctest::Approx(0.0).epsilon(1e-10));
    const double oracle =
        expected_hitting_time_oracle(qc_instance(), -1.0, 1.0, 2.0, 3.0);
    CHECK(std::abs(oracle - 1.0) <= 1e-6);

    for (double u : {-0.8, -1.5}) {
        for (double x : {1.6, 2.4}) {
            const double closed = expected_hitting_time(geo_instance(), u, 1.0, x);
            const double via_oracle =
                expected_hitting_time_oracle(geo_instance(), u, 1.0, x, 2.0);
            CHECK(std::abs(closed - via_oracle) <=
                  1e-6 * std::max(1.0, std::abs(closed)));
        }
    }
}

TEST_CASE("oracle is invariant in the reference point") {
    const double with_d3 =
        expected_hitting_time_oracle(qc_instance(), -1.0, 1.0, 2.0, 3.0);
    const double with_d5 =
        expected_hitting_time_oracle(qc_instance(), -1.0, 1.0, 2.0, 5.0);
    CHECK(std::abs(with_d3 - with_d5) <= 1e-8);

    const double geo_d = expected_hitting_time_oracle(geo_instance(), -1.0, 0.9,
                                                      2.0, 1.4);
    const double geo_d2 = expected_hitting_time_oracle(geo_instance(), -1.0,
                                                       0.9, 2.0, 3.9);
    CHECK(std::abs(geo_d - geo_d2) <= 1e-8);
}

TEST_CASE("expected hitting time monotone in x, |u|, and s") {
    const ProblemInstance inst = geo_instance();
    CHECK(expected_hitting_time(inst, -1.0, 1.0, 2.5) >
          expected_hitting_time(inst, -1.0, 1.0, 2.0));
    CHECK(expected_hitting_time(inst, -2.0, 1.0, 2.0) <
          expected_hitting_time(inst, -1.0, 1.0, 2.0));
    CHECK(expected_hitting_time(inst, -1.0, 1.2, 2.0) <
          expected_hitting_time(inst, -1.0, 1.0, 2.0));
}

TEST_CASE("scale function diverges at infinity") {
    const ScaleSpec qc = ScaleSpec::make(qc_instance(), -1.0, 1.0, 2.0);
    const ScaleSpec geo = ScaleSpec::make(geo_instance(), -1.0, 1.0, 2.0);
    for (const ScaleSpec* spec : {&qc, &geo}) {
        const double huge = scale_value(*spec, 1e6);
        CHECK(huge > 1e6 * scale_density(*spec, spec->d) * 0.1);
    }
}
