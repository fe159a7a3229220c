#include "dstop/philox.hpp"

#include <cmath>

namespace dstop {

namespace {

constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;
constexpr std::uint32_t kMultA = 0xD2511F53u;
constexpr std::uint32_t kMultB = 0xCD9E8D57u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

inline std::array<std::uint32_t, 4> round_once(std::array<std::uint32_t, 4> c,
                                               std::uint32_t k0,
                                               std::uint32_t k1) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mul_hi_lo(kMultA, c[0], hi0, lo0);
    mul_hi_lo(kMultB, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

inline double bits_to_unit_open(std::uint64_t bits) {
    // 53-bit mantissa, shifted into (0, 1]; never 0 so log() is safe.
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                        std::array<std::uint32_t, 4> counter) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int r = 0; r < 10; ++r) {
        counter = round_once(counter, k0, k1);
        k0 += kWeylA;
        k1 += kWeylB;
    }
    return counter;
}

double philox_uniform(std::uint64_t seed, std::uint64_t path,
                      std::uint64_t step) {
    const auto block = philox4x32(
        seed, {static_cast<std::uint32_t>(path),
               static_cast<std::uint32_t>(path >> 32),
               static_cast<std::uint32_t>(step),
               static_cast<std::uint32_t>(step >> 32)});
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
    return bits_to_unit_open(bits);
}

double philox_normal(std::uint64_t seed, std::uint64_t path,
                     std::uint64_t step) {
    const auto block = philox4x32(
        seed, {static_cast<std::uint32_t>(path),
               static_cast<std::uint32_t>(path >> 32),
               static_cast<std::uint32_t>(step),
               static_cast<std::uint32_t>(step >> 32)});
    const std::uint64_t bits_a =
        (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
    const std::uint64_t bits_b =
        (static_cast<std::uint64_t>(block[2]) << 32) | block[3];
    const double u1 = bits_to_unit_open(bits_a);
    const double u2 = bits_to_unit_open(bits_b);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace dstop
