#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dstop/commands.hpp"
#include "dstop/errors.hpp"

namespace {

int write_output(const dstop::CommandResult& result, const std::string& out_path) {
    const std::string text =
        result.is_csv() ? result.csv : result.report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "cannot open output file: " << out_path << "\n";
            return dstop::kExitConfigError;
        }
        out << text;
    }
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver and verification harness for drift control with "
                 "discretionary stopping"};

    std::string config_path;
    std::string command;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;

    app.add_option("--config", config_path, "Path to the JSON run config")
        ->required();
    app.add_option("--command", command,
                   "One of: solve, constrained, simulate, verify, sweep")
        ->required();
    app.add_option("--out", out_path, "Output file (stdout when omitted)");
    app.add_option("--seed", seed, "Override the config seed (simulate)");
    app.add_option("--threads", threads,
                   "Monte Carlo worker threads; must not change results");

    CLI11_PARSE(app, argc, argv);

    try {
        const dstop::RunConfig config = dstop::load_config(config_path);
        dstop::CommandOptions options;
        options.threads = threads;
        options.seed = seed;
        const dstop::CommandResult result =
            dstop::run_command(config, command, options);
        return write_output(result, out_path);
    } catch (const dstop::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return dstop::kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return dstop::kExitConfigError;
    } catch (const dstop::solver_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return dstop::kExitSolverError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dstop::kExitSolverError;
    }
}
