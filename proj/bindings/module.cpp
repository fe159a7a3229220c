#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dstop/commands.hpp"
#include "dstop/config.hpp"
#include "dstop/constrained.hpp"
#include "dstop/errors.hpp"
#include "dstop/hitting.hpp"
#include "dstop/montecarlo.hpp"
#include "dstop/solver.hpp"

namespace py = pybind11;
using namespace dstop;

namespace {

SimConfig make_sim_config(double dt, std::size_t n_paths, std::uint64_t seed,
                          double t_max, const std::string& mode,
                          unsigned threads) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.n_paths = n_paths;
    cfg.seed = seed;
    cfg.t_max = t_max;
    cfg.threads = threads;
    if (mode == "drift") {
        cfg.mode = ControlMode::DriftControl;
    } else if (mode == "variance") {
        cfg.mode = ControlMode::VarianceControl;
    } else {
        throw config_error("mode must be \"drift\" or \"variance\"");
    }
    return cfg;
}

py::dict assumption_report_dict(const AssumptionReport& report) {
    py::dict out;
    for (const AssumptionCheck& c : report.checks) {
        py::dict item;
        item["pass"] = c.pass;
        item["worst_residual"] = c.worst_residual;
        item["note"] = c.note;
        out[c.name.c_str()] = item;
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Drift control with discretionary stopping: threshold solver, "
              "hitting-time formulas, constrained variant, Monte Carlo engine.";

    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<solver_error>(m, "SolverError", PyExc_RuntimeError);

    py::class_<ProblemInstance>(m, "ProblemInstance")
        .def_readonly("c", &ProblemInstance::c)
        .def_readonly("A", &ProblemInstance::A)
        .def("mu", &ProblemInstance::mu)
        .def("sigma", &ProblemInstance::sigma)
        .def("k", &ProblemInstance::k)
        .def("psi", &ProblemInstance::psi)
        .def("with_operating_cost",
             [](const ProblemInstance& self, double c) {
                 return with_operating_cost(self, c);
             },
             py::arg("c"));

    m.def("build_problem_json", &parse_problem_text, py::arg("text"),
          "Build a ProblemInstance from a JSON problem description.");

    py::class_<ThresholdResult>(m, "ThresholdResult")
        .def_readonly("finite", &ThresholdResult::finite)
        .def_readonly("s", &ThresholdResult::s)
        .def_readonly("gamma", &ThresholdResult::gamma)
        .def_readonly("b", &ThresholdResult::b)
        .def_readonly("u_star", &ThresholdResult::u_star)
        .def_readonly("residual", &ThresholdResult::residual)
        .def("__repr__", [](const ThresholdResult& tr) {
            if (!tr.finite) return std::string("ThresholdResult(s=inf)");
            return "ThresholdResult(s=" + std::to_string(tr.s) +
                   ", u_star=" + std::to_string(tr.u_star) + ")";
        });

    m.def("solve_threshold", &solve_threshold, py::arg("instance"));
    m.def("zeta", &zeta, py::arg("instance"), py::arg("z"));

    py::class_<ValueFunction>(m, "ValueFunction")
        .def(py::init<const ProblemInstance&>(), py::arg("instance"))
        .def("__call__", &ValueFunction::operator(), py::arg("x"))
        .def("derivative", &ValueFunction::derivative, py::arg("x"))
        .def("smooth_fit_residual", &ValueFunction::smooth_fit_residual,
             py::arg("h") = 1e-6)
        .def_property_readonly("threshold", &ValueFunction::threshold)
        .def_property_readonly("zero_cost_degenerate",
                               &ValueFunction::zero_cost_degenerate);

    py::class_<Policy>(m, "Policy")
        .def_static("stop_at_once", &Policy::stop_at_once)
        .def_static("constant_threshold", &Policy::constant_threshold,
                    py::arg("u"), py::arg("s"))
        .def_readonly("u", &Policy::u)
        .def_readonly("s", &Policy::s)
        .def("stops_at_once", &Policy::stops_at_once);

    m.def("optimal_policy", &optimal_policy, py::arg("instance"),
          py::arg("threshold"));

    m.def(
        "verify_assumptions",
        [](const ProblemInstance& instance, double tol, bool variance_control) {
            return assumption_report_dict(verify_assumptions(
                instance, assumption_grid(), tol, variance_control));
        },
        py::arg("instance"), py::arg("tol") = 1e-8,
        py::arg("variance_control") = false);

    m.def(
        "check_variational_inequalities",
        [](const ProblemInstance& instance, std::size_t points, double tol) {
            const ValueFunction vf(instance);
            const ThresholdResult& tr = vf.threshold();
            const std::vector<double> grid =
                vi_grid(tr, 0.01, tr.finite ? 5.0 * tr.s : 5.0, points);
            const VIReport rep = check_variational_inequalities(vf, grid, tol);
            py::dict out;
            out["pass"] = rep.pass;
            out["min_r1"] = rep.min_r1;
            out["min_r2"] = rep.min_r2;
            out["max_r3_scaled"] = rep.max_r3_scaled;
            out["grid_points"] = rep.grid.size();
            return out;
        },
        py::arg("instance"), py::arg("points") = 10000, py::arg("tol") = 1e-8);

    m.def("expected_hitting_time", &expected_hitting_time, py::arg("instance"),
          py::arg("u"), py::arg("s"), py::arg("x"));
    m.def("expected_hitting_time_oracle", &expected_hitting_time_oracle,
          py::arg("instance"), py::arg("u"), py::arg("s"), py::arg("x"),
          py::arg("d"));

    py::class_<ConstrainedSolution>(m, "ConstrainedSolution")
        .def_readonly("lambda_hat", &ConstrainedSolution::lambda_hat)
        .def_readonly("effective_c", &ConstrainedSolution::effective_c)
        .def_readonly("threshold", &ConstrainedSolution::threshold)
        .def_readonly("value", &ConstrainedSolution::value)
        .def_readonly("expected_tau", &ConstrainedSolution::expected_tau)
        .def_readonly("slackness_residual",
                      &ConstrainedSolution::slackness_residual)
        .def_readonly("zero_cost_degenerate",
                      &ConstrainedSolution::zero_cost_degenerate);

    m.def("expected_optimal_stop_time", &expected_optimal_stop_time,
          py::arg("instance"), py::arg("x"), py::arg("c_eff"));
    m.def("solve_lagrange_multiplier", &solve_lagrange_multiplier,
          py::arg("instance"), py::arg("x"), py::arg("c"), py::arg("alpha"));
    m.def(
        "constrained_value",
        [](const ProblemInstance& instance, double x, std::optional<double> alpha) {
            const double a =
                alpha ? *alpha : std::numeric_limits<double>::infinity();
            return constrained_value(instance, x, instance.c, a);
        },
        py::arg("instance"), py::arg("x"), py::arg("alpha") = std::nullopt,
        "Constrained solve at the instance's operating cost; alpha=None means "
        "unconstrained.");
    m.def("envelope_residual", &envelope_residual, py::arg("instance"),
          py::arg("x"), py::arg("c"), py::arg("h") = 1e-4);

    py::class_<CostEstimate>(m, "CostEstimate")
        .def_readonly("mean", &CostEstimate::mean)
        .def_readonly("standard_error", &CostEstimate::standard_error)
        .def_readonly("ci95_low", &CostEstimate::ci95_low)
        .def_readonly("ci95_high", &CostEstimate::ci95_high)
        .def_readonly("n_truncated", &CostEstimate::n_truncated)
        .def_readonly("mean_stop_time", &CostEstimate::mean_stop_time)
        .def_readonly("stop_time_standard_error",
                      &CostEstimate::stop_time_standard_error)
        .def_readonly("n_paths", &CostEstimate::n_paths)
        .def_readonly("valid_for_acceptance",
                      &CostEstimate::valid_for_acceptance);

    m.def(
        "estimate_cost",
        [](const ProblemInstance& instance, const Policy& policy, double x,
           double dt, std::size_t n_paths, std::uint64_t seed, double t_max,
           const std::string& mode, unsigned threads) {
            return estimate_cost(instance, policy, x,
                                 make_sim_config(dt, n_paths, seed, t_max, mode,
                                                 threads));
        },
        py::arg("instance"), py::arg("policy"), py::arg("x"),
        py::arg("dt") = 1e-3, py::arg("n_paths") = 100000, py::arg("seed") = 0,
        py::arg("t_max") = 50.0, py::arg("mode") = "drift",
        py::arg("threads") = 0);

    m.def(
        "estimate_hitting_time",
        [](const ProblemInstance& instance, double u, double s, double x,
           double dt, std::size_t n_paths, std::uint64_t seed, double t_max,
           unsigned threads) {
            return estimate_hitting_time(
                instance, u, s, x,
                make_sim_config(dt, n_paths, seed, t_max, "drift", threads));
        },
        py::arg("instance"), py::arg("u"), py::arg("s"), py::arg("x"),
        py::arg("dt") = 1e-3, py::arg("n_paths") = 100000, py::arg("seed") = 0,
        py::arg("t_max") = 50.0, py::arg("threads") = 0);

    m.def(
        "run_command",
        [](const std::string& config_text, const std::string& command,
           unsigned threads, std::optional<std::uint64_t> seed) {
            const RunConfig config = parse_config_text(config_text);
            CommandOptions options;
            options.threads = threads;
            options.seed = seed;
            const CommandResult result = run_command(config, command, options);
            const std::string output =
                result.is_csv() ? result.csv : result.report.dump(2);
            return py::make_tuple(result.exit_code, output);
        },
        py::arg("config_text"), py::arg("command"), py::arg("threads") = 0,
        py::arg("seed") = std::nullopt,
        "Run a CLI command on a JSON config string; returns (exit_code, text).");
}
