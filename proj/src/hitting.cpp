#include "dstop/hitting.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dstop/errors.hpp"
#include "dstop/numerics.hpp"
#include "dstop/solver.hpp"

namespace dstop {

/// Lazily sampled antiderivative of -2 u mu / sigma^2 anchored at d, for
/// families without a closed-form scale density. New points integrate from
/// the nearest cached abscissa.
class InnerExponentCache {
public:
    explicit InnerExponentCache(ScaleSpec spec) : spec_(std::move(spec)) {
        samples_[spec_.d] = 0.0;
    }

    double at(double x) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = samples_.find(x);
        if (it != samples_.end()) return it->second;
        // nearest anchored sample
        auto upper = samples_.lower_bound(x);
        auto anchor = upper;
        if (upper == samples_.end()) {
            --anchor;
        } else if (upper != samples_.begin()) {
            auto lower = std::prev(upper);
            anchor = (x - lower->first) < (upper->first - x) ? lower : upper;
        }
        const auto& inst = spec_.instance;
        const double u = spec_.u;
        const double increment = integrate(
            [&](double z) {
                const double sg = inst.sigma(z);
                return -2.0 * u * inst.mu(z) / (sg * sg);
            },
            anchor->first, x, 1e-12);
        const double value = anchor->second + increment;
        samples_[x] = value;
        return value;
    }

private:
    ScaleSpec spec_;
    std::map<double, double> samples_;
    std::mutex mutex_;
};

namespace {

enum class ScaleForm { ConstantConstant, PowerRelated, Generic };

ScaleForm classify(const ScaleSpec& spec) {
    const auto& inst = spec.instance;
    if (inst.drift.kind == DriftKind::Constant &&
        inst.dispersion.kind == DispersionKind::Constant) {
        return ScaleForm::ConstantConstant;
    }
    if (inst.A > 0.0 && inst.drift.kind == DriftKind::Power) {
        return ScaleForm::PowerRelated;
    }
    return ScaleForm::Generic;
}

// Constant/Constant: p'(x) = e^{q (x - d)} with q = -2 u m / sigma0^2 > 0.
double cc_rate(const ScaleSpec& spec) {
    const double m = spec.instance.drift.m;
    const double s0 = spec.instance.dispersion.sigma0;
    return -2.0 * spec.u * m / (s0 * s0);
}

}  // namespace

ScaleSpec ScaleSpec::make(const ProblemInstance& instance, double u, double s,
                          double d) {
    if (!(u < 0.0)) throw std::invalid_argument("scale spec requires u < 0");
    if (!(s > 0.0)) throw std::invalid_argument("scale spec requires s > 0");
    if (!(d > s)) throw std::invalid_argument("scale spec requires d > s");
    ScaleSpec spec;
    spec.instance = instance;
    spec.u = u;
    spec.s = s;
    spec.d = d;
    if (classify(spec) == ScaleForm::Generic) {
        spec.inner_cache = std::make_shared<InnerExponentCache>(spec);
    }
    return spec;
}

double scale_density(const ScaleSpec& spec, double x) {
    switch (classify(spec)) {
        case ScaleForm::ConstantConstant:
            return std::exp(cc_rate(spec) * (x - spec.d));
        case ScaleForm::PowerRelated: {
            const double r = -2.0 * spec.u / spec.instance.A;
            return std::pow(spec.instance.mu(x) / spec.instance.mu(spec.d), r);
        }
        case ScaleForm::Generic:
            return std::exp(spec.inner_cache->at(x));
    }
    return 0.0;
}

double scale_value(const ScaleSpec& spec, double x) {
    if (!(x >= spec.s)) {
        throw std::invalid_argument("scale function evaluated below s");
    }
    switch (classify(spec)) {
        case ScaleForm::ConstantConstant: {
            const double q = cc_rate(spec);
            return std::expm1(q * (x - spec.d)) / q;
        }
        case ScaleForm::PowerRelated: {
            // p' = (x/d)^{a r}; integrate the power law from d.
            const double r = -2.0 * spec.u / spec.instance.A;
            const double e = spec.instance.drift.a * r;
            const double d = spec.d;
            return d / (e + 1.0) * (std::pow(x / d, e + 1.0) - 1.0);
        }
        case ScaleForm::Generic:
            return integrate([&](double z) { return scale_density(spec, z); },
                             spec.d, x, 1e-12);
    }
    return 0.0;
}

double speed_density(const ScaleSpec& spec, double x) {
    const double sg = spec.instance.sigma(x);
    return 2.0 / (scale_density(spec, x) * sg * sg);
}

double speed_mass(const ScaleSpec& spec, double a, double b,
                  double* tail_bound) {
    if (!(spec.s <= a) || !(a <= b)) {
        throw std::invalid_argument("speed_mass requires s <= a <= b");
    }
    if (tail_bound) *tail_bound = 0.0;
    if (a == b) return 0.0;
    if (std::isfinite(b)) {
        return integrate([&](double z) { return speed_density(spec, z); }, a, b,
                         1e-12);
    }
    switch (classify(spec)) {
        case ScaleForm::ConstantConstant: {
            const double q = cc_rate(spec);
            const double s0 = spec.instance.dispersion.sigma0;
            return 2.0 / (s0 * s0 * q) * std::exp(-q * (a - spec.d));
        }
        case ScaleForm::PowerRelated: {
            const double A = spec.instance.A;
            const double u = spec.u;
            const double mu_d = spec.instance.mu(spec.d);
            const double mu_a = spec.instance.mu(a);
            return 2.0 / (A - 2.0 * u) * std::pow(mu_d, -2.0 * u / A) *
                   std::pow(mu_a, 2.0 * u / A - 1.0);
        }
        case ScaleForm::Generic: {
            const TailIntegral tail = integrate_to_infinity(
                [&](double z) { return speed_density(spec, z); }, a);
            if (tail_bound) *tail_bound = tail.tail_bound;
            return tail.value;
        }
    }
    return 0.0;
}

double expected_hitting_time(const ProblemInstance& instance, double u,
                             double s, double x) {
    if (!(u < 0.0)) {
        throw std::invalid_argument("expected_hitting_time requires u < 0");
    }
    if (!(0.0 < s && s <= x)) {
        throw std::invalid_argument("expected_hitting_time requires 0 < s <= x");
    }
    return 2.0 / (instance.A - 2.0 * u) * inverse_drift_integral(instance, s, x);
}

double expected_hitting_time_oracle(const ProblemInstance& instance, double u,
                                    double s, double x, double d) {
    if (!(0.0 < s && s <= x)) {
        throw std::invalid_argument("hitting oracle requires 0 < s <= x");
    }
    const ScaleSpec spec = ScaleSpec::make(instance, u, s, d);
    const double p_x = scale_value(spec, x);
    const double p_s = scale_value(spec, s);
    const double total_mass = speed_mass(spec, s, std::numeric_limits<double>::infinity());
    const double inner = integrate(
        [&](double y) { return (p_x - scale_value(spec, y)) * speed_density(spec, y); },
        s, x, 1e-11);
    return -inner + (p_x - p_s) * total_mass;
}

}  // namespace dstop
