#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "dstop/config.hpp"

namespace dstop {

// Exit codes shared by the commands and the CLI front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverError = 3;
inline constexpr int kExitVerifyFailed = 4;
inline constexpr int kExitTruncationExceeded = 5;

struct CommandOptions {
    unsigned threads = 0;                   // 0 = leave config value
    std::optional<std::uint64_t> seed;      // overrides config seed
};

struct CommandResult {
    int exit_code = kExitOk;
    nlohmann::json report;
    std::string csv;  // set for sweep output and perturbation tables

    bool is_csv() const { return !csv.empty(); }
};

CommandResult cmd_solve(const RunConfig& config);
CommandResult cmd_constrained(const RunConfig& config);
CommandResult cmd_simulate(const RunConfig& config,
                           const CommandOptions& options = {});
CommandResult cmd_verify(const RunConfig& config);
CommandResult cmd_sweep(const RunConfig& config);

/// Dispatch by command name ("solve", "constrained", "simulate", "verify",
/// "sweep"); throws config_error for anything else.
CommandResult run_command(const RunConfig& config, const std::string& command,
                          const CommandOptions& options = {});

/// Shortest-exact decimal rendering used for CSV cells (round-trips doubles,
/// so identical results give byte-identical files).
std::string format_csv_number(double v);

}  // namespace dstop
