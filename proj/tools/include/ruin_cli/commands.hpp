// ruinctl subcommands. Each writes its artifacts under cfg.outdir and returns
// the process exit status.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include "ruin_cli/run_config.hpp"

namespace ruin::cli {

/// Exit statuses shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;        // bad input or solver failure
inline constexpr int kExitChecksFailed = 2;  // report written, some check failed

struct CommandOptions {
    /// verify: read the primal curve from this CSV instead of solving.
    std::optional<std::string> primal_input;
    /// simulate: also write per-path CSVs.
    bool record_paths = false;
    /// sweep: number of doubling rungs.
    std::size_t rungs = 3;
};

int cmd_solve_primal(const RunConfig& cfg, std::ostream& out);
int cmd_solve_dual(const RunConfig& cfg, std::ostream& out);
int cmd_legendre(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_saddle(const RunConfig& cfg, std::ostream& out);
int cmd_verify(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);

/// Dispatches by subcommand name, validating the config first. Exceptions
/// become a one-line message on `err` and kExitError.
int run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opts, std::ostream& out,
                std::ostream& err);

}  // namespace ruin::cli
