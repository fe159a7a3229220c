#pragma once

#include <array>
#include <cstdint>

namespace dstop {

/// Philox-4x32-10 counter-based generator. Stateless: every output is a pure
/// function of (key, counter), so draws keyed by (seed, path, step) are
/// identical no matter how paths are scheduled across threads.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                        std::array<std::uint32_t, 4> counter);

/// Uniform draw in (0, 1] built from 53 bits of a Philox block.
double philox_uniform(std::uint64_t seed, std::uint64_t path,
                      std::uint64_t step);

/// Standard normal draw for path step (seed, path, step), via Box-Muller on
/// one Philox block.
double philox_normal(std::uint64_t seed, std::uint64_t path,
                     std::uint64_t step);

}  // namespace dstop
