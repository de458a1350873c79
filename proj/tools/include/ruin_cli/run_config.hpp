// Configuration shared by every ruinctl subcommand.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ruin/mc_sim.hpp"
#include "ruin/model.hpp"

namespace ruin::cli {

struct RunConfig {
    MarketParams params = reference_params();
    double M = 40.0;
    std::size_t grid_n = 4001;
    double tol = 1e-10;
    SimConfig sim;
    /// Starting reduced wealth for the ruin simulation.
    double z0 = 10.0;
    std::string outdir = ".";

    /// Every problem found, empty when the config is usable.
    std::vector<std::string> problems() const;

    /// Canonical key=value text of everything that affects results (outdir
    /// and worker count excluded).
    std::string canonical() const;
    /// FNV-1a of canonical(), 16 hex digits.
    std::string hash() const;
};

/// Reads a config file. JSON when the first non-blank character is '{',
/// key=value lines otherwise ('#' starts a comment). Unknown keys and
/// malformed values throw ruin::ParseError; a missing file throws
/// std::runtime_error.
RunConfig load_config(const std::string& path);

/// Same, from text already in memory.
RunConfig parse_config(const std::string& text, const std::string& source);

}  // namespace ruin::cli
