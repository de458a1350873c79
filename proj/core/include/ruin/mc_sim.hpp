// Monte Carlo validation of the PDE solutions: controlled wealth diffusions
// for the ruin problems and the controlled/stopped Y process for the game.
//
// Death is never sampled; the exponential clock enters analytically as the
// discount e^{-lambda tau}. Each path draws from its own RNG stream derived
// from (seed, path index), and path payoffs are reduced in index order, so
// results do not depend on the worker count.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ruin/curve.hpp"
#include "ruin/fbp_dual.hpp"
#include "ruin/model.hpp"

namespace ruin {

struct SimConfig {
    std::size_t n_paths = 100000;
    double dt = 1.0 / 250.0;
    std::uint64_t seed = 20240521;
    double t_cap = 200.0;
    /// Pair path 2k with 2k+1 driven by negated normals. Needs even n_paths.
    bool antithetic = false;
    /// 0 picks std::thread::hardware_concurrency().
    unsigned workers = 0;
    /// Keep per-path outcomes in SimResult::paths.
    bool record_paths = false;

    /// Throws std::invalid_argument on n_paths < 1, dt <= 0 or t_cap <= 0.
    void validate() const;
};

/// `stopped` marks a deliberate stop at a fixed time before the cap.
enum class PathOutcome : std::uint8_t { absorbed_low, absorbed_high, capped, stopped };

std::string_view to_string(PathOutcome outcome);

struct PathRecord {
    std::size_t path_id = 0;
    PathOutcome outcome = PathOutcome::capped;
    double tau = 0.0;
    double payoff = 0.0;
};

struct SimResult {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_absorbed_low = 0;
    std::size_t n_absorbed_high = 0;
    std::size_t n_capped = 0;
    std::size_t n_stopped = 0;
    /// Paths that left the domain of the supplied curve (counted as capped).
    std::size_t n_out_of_domain = 0;
    /// e^{-lambda t_cap}: the most a capped path can misstate its payoff.
    double bias_bound = 0.0;
    std::vector<PathRecord> paths;

    /// 3 SE + allowance + (n_capped / n_paths) * bias_bound.
    double tolerance(double allowance) const;
};

/// Allowance for Euler time-stepping and unmonitored boundary overshoot.
inline constexpr double kEulerAllowance = 0.01;

/// Discounted ruin probability E[e^{-lambda tau_0} 1{tau_0 < tau_M}] for the
/// reduced wealth Z under the feedback policy. With M unset the upper
/// absorbing level is the policy grid's upper end and paths reaching it are
/// flagged out-of-domain and capped. Throws std::out_of_range when the policy
/// grid does not cover [0, M].
SimResult simulate_ruin(const Model& model, std::optional<double> M, const PolicyCurve& policy, double z0,
                        const SimConfig& cfg);

/// Same estimator for the original (W, c) problem, investing pi* from the
/// lifted reduced solution at every step.
SimResult simulate_ruin_2d(const Model& model, const ValueCurve& curve, double w0, double c0, const SimConfig& cfg);

/// Controls available to the game simulator.
struct ControlRule {
    enum class Kind { optimal, zero, scaled };
    Kind kind = Kind::optimal;
    double scale = 1.0;
    /// Clip at sqrt(2m) y.
    bool clip = false;
};

/// Stopping rules: first exit of (lower, upper), a fixed time, or both.
struct StopRule {
    double lower = 0.0;
    double upper = 0.0;
    std::optional<double> at_time;
    bool use_region = true;
};

/// Game payoff int_0^tau e^{-lambda t} Y dt + e^{-lambda tau} u_M(Y_tau) under
/// the optimal control and optimal stopping (first exit of D). Throws
/// std::invalid_argument unless y0 lies in [y_M, y_0].
SimResult simulate_game(const Model& model, double M, const DualSolution& sol, double y0, const SimConfig& cfg);

/// General form used by the saddle-point tests.
SimResult simulate_game_with(const Model& model, double M, const DualSolution& sol, double y0, const ControlRule& control,
                             const StopRule& stop, const SimConfig& cfg);

struct DeviationResult {
    std::string name;
    std::string player;  // "stopper" or "controller"
    SimResult sim;
    double tolerance = 0.0;
    bool passed = false;
};

struct SaddleReport {
    double y0 = 0.0;
    double target = 0.0;           // game value at y0 from the free-boundary solve
    double immediate_stop = 0.0;   // u_M(y0)
    bool immediate_stop_passed = false;
    DeviationResult equilibrium;
    std::vector<DeviationResult> deviations;

    bool all_passed() const;
};

/// Three stopper deviations against the optimal control (stop at T = 1, stop
/// on exit of a region shrunk by 10% of its width at each end, never stop)
/// and three controller deviations against optimal stopping (alpha = 0,
/// alpha*/2, 2 alpha* clipped at sqrt(2m) y).
SaddleReport saddle_test(const Model& model, double M, const DualSolution& sol, double y0, const SimConfig& cfg);

/// Control held constant on consecutive intervals of length `step`; the last
/// value persists past the end.
struct PiecewiseControl {
    double step = 1.0;
    std::vector<double> values;

    double at(double t) const;
};

struct ExplicitYReport {
    std::vector<double> dt;
    /// max over paths and time of |Y_euler - Y_closed| per level.
    std::vector<double> max_gap;
    /// mean over paths of the per-path maximum gap.
    std::vector<double> mean_gap;
};

/// Simulates Y by Euler on its SDE and by the explicit representation
/// Y = H (y + int alpha/H [nu ds + dB2]) with shared Brownian increments over
/// [0, cfg.t_cap]. Level k uses step cfg.dt / 2^k; coarser levels sum the
/// increments of the finest so all levels see the same Brownian paths.
ExplicitYReport explicit_y_check(const Model& model, const PiecewiseControl& control, double y0, const SimConfig& cfg,
                                 std::size_t levels = 1);

struct ExplicitYPaths {
    std::vector<double> euler;
    std::vector<double> closed;
};

/// Both discretisations for one path given Brownian increments dB1, dB2.
ExplicitYPaths explicit_y_paths(const Model& model, const PiecewiseControl& control, double y0, double dt,
                                const std::vector<double>& dB1, const std::vector<double>& dB2);

}  // namespace ruin
