#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dstop/montecarlo.hpp"
#include "dstop/problem.hpp"

namespace dstop {

// Serialized run description. Top-level keys: "problem" (required) plus the
// per-command blocks "solve", "constrained", "simulate", "verify", "sweep".
// Unknown keys are rejected everywhere; alpha accepts the string "inf".

struct SolveBlock {
    std::vector<double> xs;  // evaluation points for the value function
};

struct ConstrainedBlock {
    double x = 0.0;
    double alpha = 0.0;  // may be +infinity
};

enum class PolicyChoice { Optimal, StopAtOnce, Explicit };

struct SimulateBlock {
    double x = 0.0;
    PolicyChoice policy = PolicyChoice::Optimal;
    double u = 0.0;  // Explicit policy only
    double s = 0.0;
    SimConfig sim;
    bool t_max_given = false;  // otherwise derived from the analytic E[tau]
    std::optional<std::vector<std::pair<double, double>>> perturbations;
    double bias_budget = 0.03;
};

struct SweepBlock {
    double x = 0.0;
    std::vector<double> c_grid;      // entries > 0; empty = problem's c
    std::vector<double> alpha_grid;  // entries >= 0 or +inf; empty = {inf}
};

struct RunConfig {
    ProblemInstance problem;
    std::optional<SolveBlock> solve;
    std::optional<ConstrainedBlock> constrained;
    std::optional<SimulateBlock> simulate;
    bool verify = false;
    std::optional<SweepBlock> sweep;
};

/// Schema-validated parse; throws config_error naming the offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Builds a ProblemInstance from a standalone "problem" object (same schema
/// as the config's problem block).
ProblemInstance parse_problem_json(const nlohmann::json& node);
ProblemInstance parse_problem_text(const std::string& text);

/// Inverse of parse_config up to canonical form: parse then re-serialize is
/// idempotent.
nlohmann::json serialize_config(const RunConfig& config);

}  // namespace dstop
