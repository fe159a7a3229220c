#include <cmath>
#include <cstdint>

#include <doctest.h>

#include "dstop/philox.hpp"

using namespace dstop;

TEST_CASE("draws are pure functions of (seed, path, step)") {
    const double a = philox_normal(42, 7, 1000);
    const double b = philox_normal(42, 7, 1000);
    CHECK(a == b);
    CHECK(philox_normal(42, 7, 1001) != a);
    CHECK(philox_normal(42, 8, 1000) != a);
    CHECK(philox_normal(43, 7, 1000) != a);
}

TEST_CASE("uniform output stays inside (0, 1]") {
    for (std::uint64_t i = 0; i < 20000; ++i) {
        const double u = philox_uniform(1, i, i * 31);
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
    }
}

TEST_CASE("normal moments over a large fixed sample") {
    const std::size_t n = 200000;
    double sum = 0.0, sum_sq = 0.0, sum_cube = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = philox_normal(2024, i, 0);
        sum += z;
        sum_sq += z * z;
        sum_cube += z * z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    const double skew = sum_cube / n;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
    CHECK(std::abs(skew) < 0.03);
}

TEST_CASE("philox block is sensitive to every counter word") {
    const auto base = philox4x32(99, {1, 2, 3, 4});
    CHECK(philox4x32(99, {2, 2, 3, 4}) != base);
    CHECK(philox4x32(99, {1, 3, 3, 4}) != base);
    CHECK(philox4x32(99, {1, 2, 4, 4}) != base);
    CHECK(philox4x32(99, {1, 2, 3, 5}) != base);
    CHECK(philox4x32(100, {1, 2, 3, 4}) != base);
}
