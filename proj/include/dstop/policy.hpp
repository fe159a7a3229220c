#pragma once

#include <stdexcept>

namespace dstop {

/// Control/stopping rule executed by the simulator: either quit immediately,
/// or hold a constant control u and stop on first entrance into [-s, s].
struct Policy {
    enum class Kind { StopAtOnce, ConstantThreshold };

    Kind kind = Kind::StopAtOnce;
    double u = 0.0;
    double s = 0.0;  // > 0 for ConstantThreshold

    static Policy stop_at_once() { return {}; }

    static Policy constant_threshold(double u, double s) {
        if (!(s > 0.0)) {
            throw std::invalid_argument("policy threshold s must be > 0");
        }
        Policy p;
        p.kind = Kind::ConstantThreshold;
        p.u = u;
        p.s = s;
        return p;
    }

    bool stops_at_once() const { return kind == Kind::StopAtOnce; }
};

}  // namespace dstop
