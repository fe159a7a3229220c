#include "dstop/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dstop/errors.hpp"
#include "dstop/hitting.hpp"
#include "dstop/philox.hpp"

namespace dstop {

void SimConfig::validate() const {
    if (!(dt > 0.0) || dt > 1e-2) {
        throw std::invalid_argument("sim dt must satisfy 0 < dt <= 1e-2");
    }
    if (n_paths == 0) throw std::invalid_argument("sim n_paths must be positive");
    if (!(t_max > 0.0)) throw std::invalid_argument("sim t_max must be positive");
}

double default_t_max(double expected_tau) {
    return std::max(50.0, 20.0 * expected_tau);
}

PathOutcome simulate_path(const ProblemInstance& instance, const Policy& policy,
                          double x, const SimConfig& cfg,
                          std::uint64_t path_index) {
    cfg.validate();
    const double x0 = std::abs(x);  // problem is symmetric about the origin
    if (policy.stops_at_once()) {
        return {0.0, x0, instance.k(x0), false};
    }
    if (x0 <= policy.s) {
        return {0.0, x0, instance.k(x0), false};
    }

    const double dt = cfg.dt;
    const double sqrt_dt = std::sqrt(dt);
    const double u = policy.u;
    const double run_rate = instance.psi(u) + instance.c;  // cost per unit time
    const auto max_steps =
        static_cast<std::uint64_t>(std::ceil(cfg.t_max / dt));

    double X = x0;
    for (std::uint64_t step = 0; step < max_steps; ++step) {
        const double z = philox_normal(cfg.seed, path_index, step);
        if (cfg.mode == ControlMode::DriftControl) {
            X += u * instance.mu(X) * dt + instance.sigma(X) * sqrt_dt * z;
        } else {
            X += u * dt + u * instance.sigma(X) * sqrt_dt * z;
        }
        if (!std::isfinite(X)) {
            throw solver_error("non-finite state at step " + std::to_string(step) +
                               " of path " + std::to_string(path_index));
        }
        if (X <= policy.s) {
            const double tau = static_cast<double>(step + 1) * dt;
            return {tau, X, instance.k(X) + run_rate * tau, false};
        }
    }
    const double tau = static_cast<double>(max_steps) * dt;
    return {tau, X, instance.k(X) + run_rate * tau, true};
}

namespace {

std::vector<PathOutcome> run_paths(const ProblemInstance& instance,
                                   const Policy& policy, double x,
                                   const SimConfig& cfg) {
    std::vector<PathOutcome> outcomes(cfg.n_paths);
    unsigned workers = cfg.threads != 0 ? cfg.threads
                                        : std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, cfg.n_paths));

    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&](std::size_t begin, std::size_t end) {
        try {
            for (std::size_t i = begin; i < end; ++i) {
                outcomes[i] = simulate_path(instance, policy, x, cfg, i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    if (workers == 1) {
        worker(0, cfg.n_paths);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (cfg.n_paths + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = static_cast<std::size_t>(w) * chunk;
            const std::size_t end = std::min(begin + chunk, cfg.n_paths);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return outcomes;
}

// Fixed-order reduction over the outcome array keeps estimates identical for
// every degree of parallelism.
CostEstimate summarize(const std::vector<PathOutcome>& outcomes,
                       bool cost_from_stop_time) {
    CostEstimate est;
    est.n_paths = outcomes.size();
    const auto n = static_cast<double>(outcomes.size());

    double sum_cost = 0.0, sum_tau = 0.0;
    for (const PathOutcome& o : outcomes) {
        sum_cost += cost_from_stop_time ? o.stop_time : o.accumulated_cost;
        sum_tau += o.stop_time;
        if (o.truncated) ++est.n_truncated;
    }
    est.mean = sum_cost / n;
    est.mean_stop_time = sum_tau / n;

    double ss_cost = 0.0, ss_tau = 0.0;
    for (const PathOutcome& o : outcomes) {
        const double dc =
            (cost_from_stop_time ? o.stop_time : o.accumulated_cost) - est.mean;
        const double dtau = o.stop_time - est.mean_stop_time;
        ss_cost += dc * dc;
        ss_tau += dtau * dtau;
    }
    if (outcomes.size() > 1) {
        est.standard_error = std::sqrt(ss_cost / (n * (n - 1.0)));
        est.stop_time_standard_error = std::sqrt(ss_tau / (n * (n - 1.0)));
    }
    est.ci95_low = est.mean - 1.96 * est.standard_error;
    est.ci95_high = est.mean + 1.96 * est.standard_error;
    est.valid_for_acceptance =
        static_cast<double>(est.n_truncated) <= 0.01 * n;
    return est;
}

}  // namespace

CostEstimate estimate_cost(const ProblemInstance& instance, const Policy& policy,
                           double x, const SimConfig& cfg) {
    if (cfg.n_paths < 1000) {
        throw std::invalid_argument("estimate_cost requires n_paths >= 1000");
    }
    return summarize(run_paths(instance, policy, x, cfg), false);
}

CostEstimate estimate_hitting_time(const ProblemInstance& instance, double u,
                                   double s, double x, const SimConfig& cfg) {
    if (!(u < 0.0)) {
        throw std::invalid_argument("estimate_hitting_time requires u < 0");
    }
    const Policy policy = Policy::constant_threshold(u, s);
    return summarize(run_paths(instance, policy, x, cfg), true);
}

PerturbationReport perturbation_suite(
    const ProblemInstance& instance, double x, const SimConfig& cfg,
    std::span<const std::pair<double, double>> perturbations,
    double bias_budget) {
    const ThresholdResult tr = solve_threshold(instance);
    if (!tr.finite) {
        throw std::invalid_argument(
            "perturbation suite needs a finite optimal threshold");
    }
    const ValueFunction vf(instance, tr);
    const double x0 = std::abs(x);

    PerturbationReport report;
    report.value = vf(x0);
    report.bias_budget = bias_budget;
    report.pass = true;

    std::vector<std::pair<double, double>> all;
    all.reserve(perturbations.size() + 1);
    all.emplace_back(1.0, 1.0);
    all.insert(all.end(), perturbations.begin(), perturbations.end());

    for (const auto& [u_scale, s_scale] : all) {
        PerturbationRow row;
        row.u_scale = u_scale;
        row.s_scale = s_scale;
        row.u = tr.u_star * u_scale;
        row.s = tr.s * s_scale;
        if (!(row.s > 0.0)) {
            throw std::invalid_argument("perturbed threshold must stay positive");
        }
        row.estimate = estimate_cost(
            instance, Policy::constant_threshold(row.u, row.s), x0, cfg);
        row.analytic_cost =
            row.s >= x0
                ? instance.k(x0)
                : instance.k(row.s) +
                      (instance.c + instance.psi(row.u)) *
                          expected_hitting_time(instance, row.u, row.s, x0);
        const double slack =
            3.0 * row.estimate.standard_error + bias_budget;
        row.lower_bound_ok = row.estimate.mean >= report.value - slack;
        if (!row.lower_bound_ok) report.pass = false;
        report.rows.push_back(row);
    }

    const PerturbationRow& identity = report.rows.front();
    report.identity_matches_value =
        std::abs(identity.estimate.mean - report.value) <=
        3.0 * identity.estimate.standard_error + bias_budget;
    if (!report.identity_matches_value) report.pass = false;
    return report;
}

}  // namespace dstop
