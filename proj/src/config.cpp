#include "dstop/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "dstop/errors.hpp"

namespace dstop {

namespace {

using nlohmann::json;

void expect_object(const json& node, const std::string& context) {
    if (!node.is_object()) {
        throw config_error(context + " must be an object");
    }
}

void reject_unknown_keys(const json& node, const std::string& context,
                         std::initializer_list<const char*> allowed) {
    for (auto it = node.begin(); it != node.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw config_error("unknown key \"" + it.key() + "\" in " + context);
        }
    }
}

const json& require_key(const json& node, const std::string& context,
                        const char* key) {
    auto it = node.find(key);
    if (it == node.end()) {
        throw config_error(context + " is missing required key \"" + key + "\"");
    }
    return *it;
}

double require_number(const json& node, const std::string& context,
                      const char* key) {
    const json& v = require_key(node, context, key);
    if (!v.is_number()) {
        throw config_error(context + "." + key + " must be a number");
    }
    return v.get<double>();
}

double number_or(const json& node, const std::string& context, const char* key,
                 double fallback) {
    auto it = node.find(key);
    if (it == node.end()) return fallback;
    if (!it->is_number()) {
        throw config_error(context + "." + key + " must be a number");
    }
    return it->get<double>();
}

std::uint64_t unsigned_value(const json& v, const std::string& context,
                             const char* key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw config_error(context + "." + key + " must be a nonnegative integer");
}

double parse_alpha(const json& v, const std::string& context) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        throw config_error(context + ": the only string alpha is \"inf\"");
    }
    if (!v.is_number()) {
        throw config_error(context + ": alpha must be a number or \"inf\"");
    }
    const double alpha = v.get<double>();
    if (!(alpha >= 0.0)) throw config_error(context + ": alpha must be >= 0");
    return alpha;
}

std::string family_name(const json& node, const std::string& context) {
    const json& v = require_key(node, context, "family");
    if (!v.is_string()) {
        throw config_error(context + ".family must be a string");
    }
    return v.get<std::string>();
}

DriftFamily parse_drift(const json& node) {
    const std::string context = "problem.drift";
    expect_object(node, context);
    const std::string family = family_name(node, context);
    if (family == "constant") {
        reject_unknown_keys(node, context, {"family", "m"});
        return DriftFamily::constant(require_number(node, context, "m"));
    }
    if (family == "power") {
        reject_unknown_keys(node, context, {"family", "a", "scale"});
        return DriftFamily::power(require_number(node, context, "a"),
                                  number_or(node, context, "scale", 1.0));
    }
    throw config_error(context + ": unknown family \"" + family + "\"");
}

DispersionFamily parse_dispersion(const json& node) {
    const std::string context = "problem.dispersion";
    expect_object(node, context);
    const std::string family = family_name(node, context);
    if (family == "constant") {
        reject_unknown_keys(node, context, {"family", "sigma0"});
        return DispersionFamily::constant(require_number(node, context, "sigma0"));
    }
    if (family == "power") {
        reject_unknown_keys(node, context, {"family", "b", "scale"});
        return DispersionFamily::power(require_number(node, context, "b"),
                                       number_or(node, context, "scale", 1.0));
    }
    throw config_error(context + ": unknown family \"" + family + "\"");
}

TerminalCostFamily parse_terminal(const json& node) {
    const std::string context = "problem.terminal";
    expect_object(node, context);
    const std::string family = family_name(node, context);
    if (family == "quadratic") {
        reject_unknown_keys(node, context, {"family", "kappa"});
        return TerminalCostFamily::quadratic(require_number(node, context, "kappa"));
    }
    if (family == "logcosh") {
        reject_unknown_keys(node, context, {"family", "kappa"});
        return TerminalCostFamily::log_cosh(require_number(node, context, "kappa"));
    }
    if (family == "even_poly") {
        reject_unknown_keys(node, context, {"family", "coeffs"});
        const json& coeffs = require_key(node, context, "coeffs");
        if (!coeffs.is_array() || coeffs.empty()) {
            throw config_error(context + ".coeffs must be a nonempty array");
        }
        std::vector<double> values;
        values.reserve(coeffs.size());
        for (const json& v : coeffs) {
            if (!v.is_number()) {
                throw config_error(context + ".coeffs entries must be numbers");
            }
            values.push_back(v.get<double>());
        }
        return TerminalCostFamily::even_poly(std::move(values));
    }
    throw config_error(context + ": unknown family \"" + family + "\"");
}

RunningCostFamily parse_running(const json& node) {
    const std::string context = "problem.running";
    expect_object(node, context);
    const std::string family = family_name(node, context);
    if (family == "quadratic") {
        reject_unknown_keys(node, context, {"family", "beta"});
        return RunningCostFamily::quadratic(require_number(node, context, "beta"));
    }
    if (family == "even_power") {
        reject_unknown_keys(node, context, {"family", "beta", "p"});
        return RunningCostFamily::even_power(require_number(node, context, "beta"),
                                             require_number(node, context, "p"));
    }
    throw config_error(context + ": unknown family \"" + family + "\"");
}

ProblemInstance parse_problem(const json& node) {
    const std::string context = "problem";
    expect_object(node, context);
    reject_unknown_keys(node, context,
                        {"drift", "dispersion", "terminal", "running", "c"});
    const DriftFamily drift = parse_drift(require_key(node, context, "drift"));
    const DispersionFamily dispersion =
        parse_dispersion(require_key(node, context, "dispersion"));
    const TerminalCostFamily terminal =
        parse_terminal(require_key(node, context, "terminal"));
    const RunningCostFamily running =
        parse_running(require_key(node, context, "running"));
    const double c = require_number(node, context, "c");
    return build_problem(drift, dispersion, terminal, running, c);
}

SolveBlock parse_solve(const json& node) {
    const std::string context = "solve";
    expect_object(node, context);
    reject_unknown_keys(node, context, {"x"});
    SolveBlock block;
    auto it = node.find("x");
    if (it != node.end()) {
        if (it->is_number()) {
            block.xs.push_back(it->get<double>());
        } else if (it->is_array()) {
            for (const json& v : *it) {
                if (!v.is_number()) {
                    throw config_error("solve.x entries must be numbers");
                }
                block.xs.push_back(v.get<double>());
            }
        } else {
            throw config_error("solve.x must be a number or array of numbers");
        }
    }
    return block;
}

ConstrainedBlock parse_constrained(const json& node) {
    const std::string context = "constrained";
    expect_object(node, context);
    reject_unknown_keys(node, context, {"x", "alpha"});
    ConstrainedBlock block;
    block.x = require_number(node, context, "x");
    block.alpha = parse_alpha(require_key(node, context, "alpha"), context);
    return block;
}

SimulateBlock parse_simulate(const json& node) {
    const std::string context = "simulate";
    expect_object(node, context);
    reject_unknown_keys(node, context,
                        {"x", "policy", "dt", "n_paths", "seed", "t_max", "mode",
                         "threads", "perturbations", "bias_budget"});
    SimulateBlock block;
    block.x = require_number(node, context, "x");

    auto policy = node.find("policy");
    if (policy != node.end()) {
        if (policy->is_string()) {
            const std::string name = policy->get<std::string>();
            if (name == "optimal") {
                block.policy = PolicyChoice::Optimal;
            } else if (name == "stop_at_once") {
                block.policy = PolicyChoice::StopAtOnce;
            } else {
                throw config_error(
                    "simulate.policy must be \"optimal\", \"stop_at_once\", or "
                    "an object {u, s}");
            }
        } else if (policy->is_object()) {
            reject_unknown_keys(*policy, "simulate.policy", {"u", "s"});
            block.policy = PolicyChoice::Explicit;
            block.u = require_number(*policy, "simulate.policy", "u");
            block.s = require_number(*policy, "simulate.policy", "s");
            if (!(block.s > 0.0)) {
                throw config_error("simulate.policy.s must be > 0");
            }
        } else {
            throw config_error("simulate.policy must be a string or object");
        }
    }

    block.sim.dt = number_or(node, context, "dt", 1e-3);
    auto n_paths = node.find("n_paths");
    if (n_paths != node.end()) {
        block.sim.n_paths =
            static_cast<std::size_t>(unsigned_value(*n_paths, context, "n_paths"));
    }
    auto seed = node.find("seed");
    if (seed != node.end()) {
        block.sim.seed = unsigned_value(*seed, context, "seed");
    }
    auto t_max = node.find("t_max");
    if (t_max != node.end()) {
        if (!t_max->is_number()) {
            throw config_error("simulate.t_max must be a number");
        }
        block.sim.t_max = t_max->get<double>();
        block.t_max_given = true;
    }
    auto mode = node.find("mode");
    if (mode != node.end()) {
        if (!mode->is_string()) {
            throw config_error("simulate.mode must be \"drift\" or \"variance\"");
        }
        const std::string name = mode->get<std::string>();
        if (name == "drift") {
            block.sim.mode = ControlMode::DriftControl;
        } else if (name == "variance") {
            block.sim.mode = ControlMode::VarianceControl;
        } else {
            throw config_error("simulate.mode must be \"drift\" or \"variance\"");
        }
    }
    auto threads = node.find("threads");
    if (threads != node.end()) {
        block.sim.threads =
            static_cast<unsigned>(unsigned_value(*threads, context, "threads"));
    }
    auto perturbations = node.find("perturbations");
    if (perturbations != node.end()) {
        if (!perturbations->is_array()) {
            throw config_error("simulate.perturbations must be an array of [u_scale, s_scale] pairs");
        }
        std::vector<std::pair<double, double>> pairs;
        for (const json& entry : *perturbations) {
            if (!entry.is_array() || entry.size() != 2 ||
                !entry[0].is_number() || !entry[1].is_number()) {
                throw config_error(
                    "simulate.perturbations entries must be [u_scale, s_scale]");
            }
            pairs.emplace_back(entry[0].get<double>(), entry[1].get<double>());
        }
        block.perturbations = std::move(pairs);
    }
    block.bias_budget = number_or(node, context, "bias_budget", 0.03);
    block.sim.validate();
    return block;
}

SweepBlock parse_sweep(const json& node) {
    const std::string context = "sweep";
    expect_object(node, context);
    reject_unknown_keys(node, context, {"x", "c_grid", "alpha_grid"});
    SweepBlock block;
    block.x = require_number(node, context, "x");
    auto c_grid = node.find("c_grid");
    if (c_grid != node.end()) {
        if (!c_grid->is_array() || c_grid->empty()) {
            throw config_error("sweep.c_grid must be a nonempty array");
        }
        for (const json& v : *c_grid) {
            if (!v.is_number() || !(v.get<double>() > 0.0)) {
                throw config_error("sweep.c_grid entries must be positive numbers");
            }
            block.c_grid.push_back(v.get<double>());
        }
    }
    auto alpha_grid = node.find("alpha_grid");
    if (alpha_grid != node.end()) {
        if (!alpha_grid->is_array() || alpha_grid->empty()) {
            throw config_error("sweep.alpha_grid must be a nonempty array");
        }
        for (const json& v : *alpha_grid) {
            block.alpha_grid.push_back(parse_alpha(v, "sweep.alpha_grid"));
        }
    }
    if (block.c_grid.empty() && block.alpha_grid.empty()) {
        throw config_error("sweep needs c_grid and/or alpha_grid");
    }
    return block;
}

json dump_problem(const ProblemInstance& p) {
    json drift;
    if (p.drift.kind == DriftKind::Constant) {
        drift = {{"family", "constant"}, {"m", p.drift.m}};
    } else {
        drift = {{"family", "power"}, {"a", p.drift.a}, {"scale", p.drift.scale}};
    }
    json dispersion;
    if (p.dispersion.kind == DispersionKind::Constant) {
        dispersion = {{"family", "constant"}, {"sigma0", p.dispersion.sigma0}};
    } else {
        dispersion = {{"family", "power"},
                      {"b", p.dispersion.b},
                      {"scale", p.dispersion.scale}};
    }
    json terminal;
    switch (p.terminal.kind) {
        case TerminalCostKind::Quadratic:
            terminal = {{"family", "quadratic"}, {"kappa", p.terminal.kappa}};
            break;
        case TerminalCostKind::LogCosh:
            terminal = {{"family", "logcosh"}, {"kappa", p.terminal.kappa}};
            break;
        case TerminalCostKind::EvenPoly:
            terminal = {{"family", "even_poly"}, {"coeffs", p.terminal.coeffs}};
            break;
    }
    json running;
    if (p.running.kind == RunningCostKind::Quadratic) {
        running = {{"family", "quadratic"}, {"beta", p.running.beta}};
    } else {
        running = {{"family", "even_power"},
                   {"beta", p.running.beta},
                   {"p", p.running.p}};
    }
    return {{"drift", drift},
            {"dispersion", dispersion},
            {"terminal", terminal},
            {"running", running},
            {"c", p.c}};
}

json dump_alpha(double alpha) {
    if (std::isinf(alpha)) return json("inf");
    return json(alpha);
}

}  // namespace

ProblemInstance parse_problem_json(const json& node) {
    return parse_problem(node);
}

ProblemInstance parse_problem_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("problem is not valid JSON: ") + e.what());
    }
    return parse_problem(doc);
}

RunConfig parse_config(const json& doc) {
    expect_object(doc, "config");
    reject_unknown_keys(doc, "config",
                        {"problem", "solve", "constrained", "simulate", "verify",
                         "sweep"});
    RunConfig config{parse_problem(require_key(doc, "config", "problem")),
                     std::nullopt, std::nullopt, std::nullopt, false,
                     std::nullopt};
    if (auto it = doc.find("solve"); it != doc.end()) {
        config.solve = parse_solve(*it);
    }
    if (auto it = doc.find("constrained"); it != doc.end()) {
        config.constrained = parse_constrained(*it);
    }
    if (auto it = doc.find("simulate"); it != doc.end()) {
        config.simulate = parse_simulate(*it);
    }
    if (auto it = doc.find("verify"); it != doc.end()) {
        expect_object(*it, "verify");
        reject_unknown_keys(*it, "verify", {});
        config.verify = true;
    }
    if (auto it = doc.find("sweep"); it != doc.end()) {
        config.sweep = parse_sweep(*it);
    }
    return config;
}

RunConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

json serialize_config(const RunConfig& config) {
    json doc;
    doc["problem"] = dump_problem(config.problem);
    if (config.solve) {
        doc["solve"] = {{"x", config.solve->xs}};
    }
    if (config.constrained) {
        doc["constrained"] = {{"x", config.constrained->x},
                              {"alpha", dump_alpha(config.constrained->alpha)}};
    }
    if (config.simulate) {
        const SimulateBlock& b = *config.simulate;
        json sim{{"x", b.x},
                 {"dt", b.sim.dt},
                 {"n_paths", b.sim.n_paths},
                 {"seed", b.sim.seed},
                 {"mode", b.sim.mode == ControlMode::DriftControl ? "drift"
                                                                  : "variance"},
                 {"bias_budget", b.bias_budget}};
        if (b.t_max_given) sim["t_max"] = b.sim.t_max;
        if (b.sim.threads != 0) sim["threads"] = b.sim.threads;
        switch (b.policy) {
            case PolicyChoice::Optimal:
                sim["policy"] = "optimal";
                break;
            case PolicyChoice::StopAtOnce:
                sim["policy"] = "stop_at_once";
                break;
            case PolicyChoice::Explicit:
                sim["policy"] = {{"u", b.u}, {"s", b.s}};
                break;
        }
        if (b.perturbations) {
            json pairs = json::array();
            for (const auto& [us, ss] : *b.perturbations) {
                pairs.push_back({us, ss});
            }
            sim["perturbations"] = pairs;
        }
        doc["simulate"] = sim;
    }
    if (config.verify) doc["verify"] = json::object();
    if (config.sweep) {
        json sweep{{"x", config.sweep->x}};
        if (!config.sweep->c_grid.empty()) sweep["c_grid"] = config.sweep->c_grid;
        if (!config.sweep->alpha_grid.empty()) {
            json alphas = json::array();
            for (double a : config.sweep->alpha_grid) alphas.push_back(dump_alpha(a));
            sweep["alpha_grid"] = alphas;
        }
        doc["sweep"] = sweep;
    }
    return doc;
}

}  // namespace dstop
