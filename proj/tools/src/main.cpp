// ruinctl: solves, cross-checks and simulates the lifetime-ruin problem.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ruin/io.hpp"
#include "ruin_cli/commands.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> outdir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> dt;
    std::optional<std::size_t> grid;
    std::optional<double> barrier;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "key=value or JSON config file");
    sub->add_option("--outdir", f.outdir, "directory for output files");
    sub->add_option("--seed", f.seed, "RNG seed (overrides config)");
    sub->add_option("--paths", f.paths, "Monte Carlo path count");
    sub->add_option("--dt", f.dt, "Euler time step in years");
    sub->add_option("--grid", f.grid, "grid points");
    sub->add_option("--barrier", f.barrier, "barrier M");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimum probability of lifetime ruin: PDE solvers, duality checks and Monte Carlo"};
    app.require_subcommand(1);

    Flags flags;
    ruin::cli::CommandOptions opts;
    std::string primal_input;

    const char* names[][2] = {
        {"solve-primal", "solve the ruin HJB; writes primal.csv, residual.csv, convexity.json"},
        {"solve-dual", "solve the free-boundary game; writes dual.csv, boundary.json"},
        {"legendre", "transform the game value and compare; writes legendre.csv, duality.json"},
        {"simulate", "Monte Carlo ruin and game estimates; writes simulate.json"},
        {"saddle", "saddle-point deviation tests; writes saddle.json"},
        {"verify", "run every check; writes verification.json"},
        {"sweep", "doubling ladder in M; writes sweep.csv, sweep.json"},
    };
    for (const auto& [name, help] : names) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, flags);
        if (std::string(name) == "verify") sub->add_option("--primal", primal_input, "primal.csv to verify instead of solving");
        if (std::string(name) == "simulate") sub->add_flag("--record-paths", opts.record_paths, "write per-path CSVs");
        if (std::string(name) == "sweep") sub->add_option("--rungs", opts.rungs, "number of doublings")->check(CLI::PositiveNumber);
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    ruin::cli::RunConfig cfg;
    try {
        if (!flags.config.empty()) cfg = ruin::cli::load_config(flags.config);
    } catch (const std::exception& e) {
        std::cerr << command << ": " << e.what() << '\n';
        return ruin::cli::kExitError;
    }
    if (flags.outdir) cfg.outdir = *flags.outdir;
    if (flags.seed) cfg.sim.seed = *flags.seed;
    if (flags.paths) cfg.sim.n_paths = *flags.paths;
    if (flags.dt) cfg.sim.dt = *flags.dt;
    if (flags.grid) cfg.grid_n = *flags.grid;
    if (flags.barrier) cfg.M = *flags.barrier;
    if (!primal_input.empty()) opts.primal_input = primal_input;

    return ruin::cli::run_command(command, cfg, opts, std::cout, std::cerr);
}
