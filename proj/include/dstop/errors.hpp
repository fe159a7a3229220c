#pragma once

#include <stdexcept>
#include <string>

namespace dstop {

/// Raised for malformed or out-of-range configuration input. CLI exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a numerical routine cannot deliver its contract
/// (bracket failure, quadrature non-convergence, non-finite state,
/// violated monotonicity assumptions). CLI exit code 3.
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dstop
