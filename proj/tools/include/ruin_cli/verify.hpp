// End-to-end verification behind `ruinctl verify`: primal shape and
// residuals, free boundary, duality gaps, control form, Monte Carlo against
// both PDE solutions and the saddle-point deviations.

#pragma once

#include <string>
#include <vector>

#include "ruin/curve.hpp"
#include "ruin/duality.hpp"
#include "ruin/mc_sim.hpp"
#include "ruin/pde_primal.hpp"
#include "ruin_cli/run_config.hpp"

namespace ruin::cli {

/// Grid spacing at which the fixed tolerances below apply; coarser grids
/// scale them by h / kReferenceSpacing.
inline constexpr double kReferenceSpacing = 0.01;
inline constexpr double kResidualConstant = 1e-3;  // sup residual <= C h
inline constexpr double kResidualRatioLow = 1.3;
inline constexpr double kResidualRatioHigh = 2.7;
inline constexpr double kDualityGapTol = 5e-3;
inline constexpr double kBoundaryGapTol = 1e-2;
inline constexpr double kPastingTol = 1e-8;
inline constexpr double kAlphaFormTol = 1e-3;

struct Check {
    std::string name;
    double measured = 0.0;
    /// One of "<=", "<", ">=", ">", "in".
    std::string relation;
    double lower = 0.0;
    double upper = 0.0;
    bool passed = false;

    static Check at_most(std::string name, double measured, double bound);
    static Check below(std::string name, double measured, double bound);
    static Check at_least(std::string name, double measured, double bound);
    static Check above(std::string name, double measured, double bound);
    static Check within(std::string name, double measured, double lo, double hi);
};

/// Reported quantity that does not gate the exit status.
struct Diagnostic {
    std::string name;
    double value = 0.0;
    std::string note;
};

struct PrimalOutcome {
    ValueCurve curve;
    PolicyCurve policy;
    PrimalSolveLog log;
};

struct VerificationReport {
    double h_primal = 0.0;
    double h_dual = 0.0;
    double h_scale = 1.0;
    std::vector<Check> checks;
    std::vector<Diagnostic> diagnostics;
    DualityReport duality;
    SaddleReport saddle;

    bool all_passed() const;
};

/// Runs every check. With `supplied` set, that curve and policy stand in for
/// the primal solve; the residual-halving study always solves afresh.
VerificationReport run_verification(const RunConfig& cfg, const PrimalOutcome* supplied = nullptr);

}  // namespace ruin::cli
