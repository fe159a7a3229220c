#include "dstop/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "dstop/constrained.hpp"
#include "dstop/errors.hpp"
#include "dstop/hitting.hpp"
#include "dstop/montecarlo.hpp"
#include "dstop/solver.hpp"

namespace dstop {

namespace {

using nlohmann::json;

json json_alpha(double alpha) {
    if (std::isinf(alpha)) return json("inf");
    return json(alpha);
}

json json_estimate(const CostEstimate& e) {
    return {{"mean", e.mean},
            {"standard_error", e.standard_error},
            {"ci95_low", e.ci95_low},
            {"ci95_high", e.ci95_high},
            {"n_truncated", e.n_truncated},
            {"mean_stop_time", e.mean_stop_time},
            {"stop_time_standard_error", e.stop_time_standard_error},
            {"n_paths", e.n_paths},
            {"valid_for_acceptance", e.valid_for_acceptance}};
}

json vi_summary(const VIReport& r) {
    return {{"pass", r.pass},
            {"min_r1", r.min_r1},
            {"min_r2", r.min_r2},
            {"max_r3_scaled", r.max_r3_scaled},
            {"grid_points", r.grid.size()},
            {"tol", r.tol}};
}

void fill_threshold(json& report, const ThresholdResult& tr) {
    if (tr.finite) {
        report["s"] = tr.s;
        report["gamma"] = tr.gamma;
        report["b"] = tr.b;
        report["u_star"] = tr.u_star;
        report["residual"] = tr.residual;
    } else {
        report["s"] = "inf";
        report["stop_at_once"] = true;
    }
}

std::vector<double> solve_grid(const ThresholdResult& tr,
                               const std::vector<double>& xs,
                               std::size_t points) {
    double hi = tr.finite ? 5.0 * tr.s : 5.0;
    for (double x : xs) hi = std::max(hi, 1.2 * std::abs(x));
    hi = std::max(hi, 1.0);
    return vi_grid(tr, 0.01, hi, points);
}

}  // namespace

std::string format_csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CommandResult cmd_solve(const RunConfig& config) {
    const ProblemInstance& inst = config.problem;
    const std::vector<double> xs =
        config.solve ? config.solve->xs : std::vector<double>{};
    CommandResult result;
    result.report["command"] = "solve";
    result.report["c"] = inst.c;
    result.report["A"] = inst.A;

    if (inst.c == 0.0) {
        // Zero operating cost: drift to the origin for free, V is k(0).
        result.report["zero_cost_degenerate"] = true;
        result.report["s"] = "inf";
        result.report["value_everywhere"] = inst.k(0.0);
        json values = json::array();
        for (double x : xs) {
            values.push_back({{"x", x}, {"V", inst.k(0.0)}});
        }
        result.report["values"] = values;
        return result;
    }

    const ThresholdResult tr = solve_threshold(inst);
    const ValueFunction vf(inst, tr);
    fill_threshold(result.report, tr);

    json values = json::array();
    for (double x : xs) {
        values.push_back({{"x", x}, {"V", vf(x)}});
    }
    result.report["values"] = values;

    const std::vector<double> grid = solve_grid(tr, xs, 2000);
    result.report["vi"] = vi_summary(check_variational_inequalities(vf, grid, 1e-8));
    result.report["smooth_fit_residual"] = vf.smooth_fit_residual();
    return result;
}

CommandResult cmd_constrained(const RunConfig& config) {
    if (!config.constrained) {
        throw config_error("constrained command needs a \"constrained\" block");
    }
    const ProblemInstance& inst = config.problem;
    const ConstrainedBlock& block = *config.constrained;
    const ConstrainedSolution sol =
        constrained_value(inst, block.x, inst.c, block.alpha);

    CommandResult result;
    json& report = result.report;
    report["command"] = "constrained";
    report["x"] = block.x;
    report["alpha"] = json_alpha(block.alpha);
    report["c"] = inst.c;
    report["lambda_hat"] = sol.lambda_hat;
    report["effective_c"] = sol.effective_c;
    report["V_alpha"] = sol.value;
    report["expected_tau"] = sol.expected_tau;
    report["slackness_residual"] = sol.slackness_residual;
    if (sol.zero_cost_degenerate) report["zero_cost_degenerate"] = true;
    fill_threshold(report, sol.threshold);
    return result;
}

CommandResult cmd_simulate(const RunConfig& config,
                           const CommandOptions& options) {
    if (!config.simulate) {
        throw config_error("simulate command needs a \"simulate\" block");
    }
    const ProblemInstance& inst = config.problem;
    SimulateBlock block = *config.simulate;
    if (options.threads != 0) block.sim.threads = options.threads;
    if (options.seed) block.sim.seed = *options.seed;

    const bool reflected = block.x < 0.0;
    const double x0 = std::abs(block.x);

    CommandResult result;
    json& report = result.report;
    report["command"] = "simulate";
    report["x"] = block.x;
    if (reflected) report["x_reflected"] = true;  // symmetric problem
    report["seed"] = block.sim.seed;
    report["dt"] = block.sim.dt;
    report["n_paths"] = block.sim.n_paths;
    report["mode"] =
        block.sim.mode == ControlMode::DriftControl ? "drift" : "variance";

    if (block.perturbations) {
        const PerturbationReport suite = perturbation_suite(
            inst, x0, block.sim, *block.perturbations, block.bias_budget);
        report["analytic_value"] = suite.value;
        report["bias_budget"] = suite.bias_budget;
        report["identity_matches_value"] = suite.identity_matches_value;
        report["pass"] = suite.pass;
        json rows = json::array();
        std::ostringstream csv;
        csv << "label,u_scale,s_scale,u,s,mean,standard_error,ci95_low,"
               "ci95_high,n_truncated,mean_stop_time,stop_time_standard_error,"
               "analytic_cost,lower_bound_ok\n";
        bool truncation_exceeded = false;
        for (std::size_t i = 0; i < suite.rows.size(); ++i) {
            const PerturbationRow& row = suite.rows[i];
            rows.push_back({{"u_scale", row.u_scale},
                            {"s_scale", row.s_scale},
                            {"u", row.u},
                            {"s", row.s},
                            {"estimate", json_estimate(row.estimate)},
                            {"analytic_cost", row.analytic_cost},
                            {"lower_bound_ok", row.lower_bound_ok}});
            csv << (i == 0 ? "identity" : "perturbed") << ','
                << format_csv_number(row.u_scale) << ','
                << format_csv_number(row.s_scale) << ','
                << format_csv_number(row.u) << ','
                << format_csv_number(row.s) << ','
                << format_csv_number(row.estimate.mean) << ','
                << format_csv_number(row.estimate.standard_error) << ','
                << format_csv_number(row.estimate.ci95_low) << ','
                << format_csv_number(row.estimate.ci95_high) << ','
                << row.estimate.n_truncated << ','
                << format_csv_number(row.estimate.mean_stop_time) << ','
                << format_csv_number(row.estimate.stop_time_standard_error) << ','
                << format_csv_number(row.analytic_cost) << ','
                << (row.lower_bound_ok ? 1 : 0) << '\n';
            if (!row.estimate.valid_for_acceptance) truncation_exceeded = true;
        }
        report["rows"] = rows;
        result.csv = csv.str();
        if (truncation_exceeded) result.exit_code = kExitTruncationExceeded;
        return result;
    }

    Policy policy;
    double analytic_value = std::numeric_limits<double>::quiet_NaN();
    bool have_value = false;
    switch (block.policy) {
        case PolicyChoice::Optimal: {
            if (inst.c == 0.0) {
                policy = Policy::stop_at_once();
                analytic_value = inst.k(0.0);
                have_value = true;
                report["zero_cost_degenerate"] = true;
            } else {
                const ThresholdResult tr = solve_threshold(inst);
                policy = optimal_policy(inst, tr);
                analytic_value = ValueFunction(inst, tr)(x0);
                have_value = true;
            }
            break;
        }
        case PolicyChoice::StopAtOnce:
            policy = Policy::stop_at_once();
            break;
        case PolicyChoice::Explicit:
            policy = Policy::constant_threshold(block.u, block.s);
            break;
    }
    report["policy"] =
        policy.stops_at_once()
            ? json("stop_at_once")
            : json{{"u", policy.u}, {"s", policy.s}};

    if (!block.t_max_given && !policy.stops_at_once() && policy.u < 0.0 &&
        x0 > policy.s) {
        block.sim.t_max = default_t_max(
            expected_hitting_time(inst, policy.u, policy.s, x0));
    }

    const CostEstimate est = estimate_cost(inst, policy, x0, block.sim);
    report["estimate"] = json_estimate(est);
    if (have_value) {
        report["analytic_value"] = analytic_value;
        report["abs_error"] = std::abs(est.mean - analytic_value);
        report["within_budget"] =
            std::abs(est.mean - analytic_value) <=
            3.0 * est.standard_error + block.bias_budget;
    }
    if (!est.valid_for_acceptance) result.exit_code = kExitTruncationExceeded;
    return result;
}

CommandResult cmd_verify(const RunConfig& config) {
    const ProblemInstance& inst = config.problem;
    CommandResult result;
    json checks = json::array();
    std::string first_failure;

    auto add_check = [&](const std::string& name, bool pass, json details) {
        details["name"] = name;
        details["pass"] = pass;
        checks.push_back(details);
        if (!pass && first_failure.empty()) first_failure = name;
    };

    {
        const AssumptionReport rep =
            verify_assumptions(inst, assumption_grid(), 1e-8);
        json items = json::array();
        for (const AssumptionCheck& c : rep.checks) {
            items.push_back({{"assumption", c.name},
                             {"pass", c.pass},
                             {"worst_residual", c.worst_residual},
                             {"note", c.note}});
        }
        add_check("assumptions", rep.all_pass(), {{"items", items}});
    }

    {
        const ConjugatePair conj(inst.running);
        double worst = 0.0;
        for (double z : {0.5, 1.0, 2.0, 4.0}) {
            worst = std::max(worst, conj.eta_derivative_residual(z, 1e-5));
        }
        add_check("eta_derivative", worst <= 1e-6, {{"max_residual", worst}});
    }

    if (inst.c == 0.0) {
        for (const char* name : {"variational_inequalities", "smooth_fit",
                                 "hitting_oracle_agreement", "envelope"}) {
            add_check(name, true, {{"skipped", "zero operating cost"}});
        }
    } else {
        // A solver failure here is itself a verification finding: assumption
        // violations surface as bracketing or monotonicity errors.
        bool solved = false;
        ThresholdResult tr;
        try {
            tr = solve_threshold(inst);
            solved = true;
        } catch (const solver_error& e) {
            add_check("threshold_solve", false, {{"error", e.what()}});
        }
        if (solved) {
            const ValueFunction vf(inst, tr);

            {
                const std::vector<double> grid =
                    vi_grid(tr, 0.01, tr.finite ? 5.0 * tr.s : 5.0, 10000);
                const VIReport rep =
                    check_variational_inequalities(vf, grid, 1e-8);
                add_check("variational_inequalities", rep.pass, vi_summary(rep));
            }

            if (tr.finite) {
                const double residual = vf.smooth_fit_residual();
                add_check("smooth_fit", residual <= 1e-6,
                          {{"residual", residual}});
            } else {
                add_check("smooth_fit", true,
                          {{"skipped", "infinite threshold"}});
            }

            if (tr.finite) {
                const double x_probe = 2.0 * tr.s;
                const double closed =
                    expected_hitting_time(inst, tr.u_star, tr.s, x_probe);
                const double oracle = expected_hitting_time_oracle(
                    inst, tr.u_star, tr.s, x_probe, tr.s + 1.0);
                const double rel =
                    std::abs(closed - oracle) / std::max(1.0, std::abs(closed));
                add_check("hitting_oracle_agreement", rel <= 1e-6,
                          {{"closed_form", closed},
                           {"oracle", oracle},
                           {"relative_difference", rel}});
            } else {
                add_check("hitting_oracle_agreement", true,
                          {{"skipped", "infinite threshold"}});
            }

            const double h = 1e-4;
            if (inst.c > h) {
                const double x_probe = tr.finite ? 2.0 * tr.s : 2.0;
                const double residual =
                    envelope_residual(inst, x_probe, inst.c, h);
                add_check("envelope", residual <= 1e-4,
                          {{"residual", residual}});
            } else {
                add_check("envelope", true,
                          {{"skipped", "c too small for step"}});
            }
        }
    }

    result.report["command"] = "verify";
    result.report["checks"] = checks;
    result.report["pass"] = first_failure.empty();
    if (!first_failure.empty()) {
        result.report["failed_check"] = first_failure;
        result.exit_code = kExitVerifyFailed;
    }
    return result;
}

CommandResult cmd_sweep(const RunConfig& config) {
    if (!config.sweep) throw config_error("sweep command needs a \"sweep\" block");
    const ProblemInstance& inst = config.problem;
    const SweepBlock& block = *config.sweep;

    std::vector<double> c_grid = block.c_grid;
    if (c_grid.empty()) {
        if (!(inst.c > 0.0)) {
            throw config_error("sweep without c_grid requires problem c > 0");
        }
        c_grid.push_back(inst.c);
    }
    std::vector<double> alpha_grid = block.alpha_grid;
    if (alpha_grid.empty()) {
        alpha_grid.push_back(std::numeric_limits<double>::infinity());
    }

    struct Row {
        double c, alpha, value, lambda_hat, expected_tau;
        ThresholdResult threshold;
    };
    std::vector<Row> rows;
    rows.reserve(c_grid.size() * alpha_grid.size());
    for (double c : c_grid) {
        const ProblemInstance inst_c = with_operating_cost(inst, c);
        for (double alpha : alpha_grid) {
            const ConstrainedSolution sol =
                constrained_value(inst_c, block.x, c, alpha);
            rows.push_back({c, alpha, sol.value, sol.lambda_hat,
                            sol.expected_tau, sol.threshold});
        }
    }

    std::ostringstream csv;
    csv << "c,alpha,s,u_star,V,lambda_hat,expected_tau\n";
    json json_rows = json::array();
    for (const Row& row : rows) {
        const std::string alpha_text =
            std::isinf(row.alpha) ? "inf" : format_csv_number(row.alpha);
        const std::string s_text =
            row.threshold.finite ? format_csv_number(row.threshold.s) : "inf";
        const std::string u_text =
            row.threshold.finite ? format_csv_number(row.threshold.u_star) : "";
        csv << format_csv_number(row.c) << ',' << alpha_text << ',' << s_text
            << ',' << u_text << ',' << format_csv_number(row.value) << ','
            << format_csv_number(row.lambda_hat) << ','
            << format_csv_number(row.expected_tau) << '\n';
        json jrow{{"c", row.c},
                  {"alpha", json_alpha(row.alpha)},
                  {"V", row.value},
                  {"lambda_hat", row.lambda_hat},
                  {"expected_tau", row.expected_tau}};
        fill_threshold(jrow, row.threshold);
        json_rows.push_back(jrow);
    }

    // Monotonicity summaries along each swept dimension.
    const double tol = 1e-12;
    bool s_increasing = true, v_up_in_c = true;
    bool v_down_in_alpha = true, lambda_down_in_alpha = true;
    bool c_varies = c_grid.size() > 1, alpha_varies = alpha_grid.size() > 1;
    if (c_varies) {
        for (double alpha : alpha_grid) {
            std::vector<const Row*> group;
            for (const Row& r : rows) {
                if (r.alpha == alpha ||
                    (std::isinf(r.alpha) && std::isinf(alpha))) {
                    group.push_back(&r);
                }
            }
            std::sort(group.begin(), group.end(),
                      [](const Row* a, const Row* b) { return a->c < b->c; });
            for (std::size_t i = 1; i < group.size(); ++i) {
                const double s_prev = group[i - 1]->threshold.finite
                                          ? group[i - 1]->threshold.s
                                          : std::numeric_limits<double>::infinity();
                const double s_cur = group[i]->threshold.finite
                                         ? group[i]->threshold.s
                                         : std::numeric_limits<double>::infinity();
                if (!(s_cur > s_prev)) s_increasing = false;
                if (group[i]->value + tol < group[i - 1]->value) v_up_in_c = false;
            }
        }
    }
    if (alpha_varies) {
        for (double c : c_grid) {
            std::vector<const Row*> group;
            for (const Row& r : rows) {
                if (r.c == c) group.push_back(&r);
            }
            std::sort(group.begin(), group.end(),
                      [](const Row* a, const Row* b) { return a->alpha < b->alpha; });
            for (std::size_t i = 1; i < group.size(); ++i) {
                if (group[i]->value > group[i - 1]->value + tol) {
                    v_down_in_alpha = false;
                }
                if (group[i]->lambda_hat > group[i - 1]->lambda_hat + tol) {
                    lambda_down_in_alpha = false;
                }
            }
        }
    }
    csv << "# monotonicity:";
    if (c_varies) {
        csv << " s_strictly_increasing_in_c=" << (s_increasing ? "pass" : "fail")
            << " V_nondecreasing_in_c=" << (v_up_in_c ? "pass" : "fail");
    }
    if (alpha_varies) {
        csv << " V_nonincreasing_in_alpha=" << (v_down_in_alpha ? "pass" : "fail")
            << " lambda_hat_nonincreasing_in_alpha="
            << (lambda_down_in_alpha ? "pass" : "fail");
    }
    if (!c_varies && !alpha_varies) csv << " n/a";
    csv << '\n';

    CommandResult result;
    result.report["command"] = "sweep";
    result.report["x"] = block.x;
    result.report["rows"] = json_rows;
    if (c_varies) {
        result.report["s_strictly_increasing_in_c"] = s_increasing;
        result.report["V_nondecreasing_in_c"] = v_up_in_c;
    }
    if (alpha_varies) {
        result.report["V_nonincreasing_in_alpha"] = v_down_in_alpha;
        result.report["lambda_hat_nonincreasing_in_alpha"] = lambda_down_in_alpha;
    }
    result.csv = csv.str();
    return result;
}

CommandResult run_command(const RunConfig& config, const std::string& command,
                          const CommandOptions& options) {
    if (command == "solve") return cmd_solve(config);
    if (command == "constrained") return cmd_constrained(config);
    if (command == "simulate") return cmd_simulate(config, options);
    if (command == "verify") return cmd_verify(config);
    if (command == "sweep") return cmd_sweep(config);
    throw config_error("unknown command \"" + command + "\"");
}

}  // namespace dstop
