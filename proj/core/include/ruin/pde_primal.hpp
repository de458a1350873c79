// Minimum probability of lifetime ruin for the reduced one-dimensional
// problem: an upwind finite-difference discretisation of the HJB boundary
// value problem on [0, M], solved by policy iteration.

#pragma once

#include <cstddef>
#include <vector>

#include "ruin/curve.hpp"
#include "ruin/errors.hpp"
#include "ruin/model.hpp"

namespace ruin {

struct PrimalSolveLog {
    std::size_t iterations = 0;
    /// Sup-norm change between successive policy-iteration iterates.
    std::vector<double> sup_changes;
    /// True when the d2 floor was active at some interior node of the
    /// returned iterate (never the case for an accepted solution).
    bool floor_active = false;
};

struct PrimalOptions {
    std::size_t max_iterations = 1000;
    double d2_floor = 1e-12;
};

/// Solves lambda f = (r~ z - 1) f' + 1/2 b^2 (1 - rho^2) z^2 f'' - m f'^2 / f''
/// on [0, M] with f(0) = 1 and f(M) = 0.
///
/// Policy iteration: freeze the investment policy from the current iterate,
/// solve the linear monotone tridiagonal system exactly, repeat until the
/// sup-norm change drops below `tol`. Throws std::invalid_argument on bad
/// inputs and SolverError when the iteration does not converge or the final
/// iterate is not strictly convex.
ValueCurve solve_primal(const Model& model, double M, std::size_t n, double tol, PrimalSolveLog* log = nullptr,
                        const PrimalOptions& options = {});

struct LadderRung {
    double M = 0.0;
    std::size_t n = 0;
    /// sup_z |phi_{2M} - phi_M| over [0, 2M], with phi_M extended by zero.
    double sup_gap = 0.0;
};

struct UnboundedSolution {
    ValueCurve curve;  // kind primal_unbounded, on [0, M_star]
    double M_star = 0.0;
    std::vector<LadderRung> ladder;
};

struct UnboundedOptions {
    double M_start = 40.0;
    double h = 0.01;
    std::size_t max_rungs = 8;
    double solve_tol = 1e-10;
};

/// Doubles M at fixed spacing h until sup |phi_{2M} - phi_M| < tol and returns
/// phi_M at that rung. Throws SolverError when the ladder stops contracting or
/// runs out of rungs.
UnboundedSolution solve_unbounded(const Model& model, double tol, const UnboundedOptions& options = {});

/// Rungs M_start * 2^k for k < rungs, each with its doubling gap. No
/// contraction check; callers read the gaps.
std::vector<LadderRung> convergence_ladder(const Model& model, std::size_t rungs, const UnboundedOptions& options = {});

/// Feedback policy pi~ = -excess * f' / (sigma^2 f'') evaluated on the curve's
/// nodes. Throws SolverError if f'' <= 0 at an interior node.
PolicyCurve feedback_policy(const ValueCurve& curve, const Model& model);

/// pi~(z) = -excess f'(z) / (sigma^2 f''(z)) with f', f'' interpolated from
/// the stored estimates.
double reduced_policy_at(const ValueCurve& curve, const Model& model, double z);

struct Lift {
    double psi = 0.0;      // minimum ruin probability at (w, c)
    double pi_star = 0.0;  // dollars in the risky asset
};

/// Evaluates the two-dimensional value and optimal risky holding from the
/// reduced curve via psi(w, c) = phi(w / c). Throws std::out_of_range when
/// w / c exceeds the grid.
Lift lift_2d(const ValueCurve& curve, const Model& model, double w, double c);

struct ResidualProfile {
    std::vector<double> z;
    std::vector<double> residual;

    double sup() const;
};

/// Pointwise HJB residual on interior nodes using the curve's stored
/// derivative estimates. Where f'' <= 0 the minimised term is -inf unless
/// f' = 0 as well, in which case it is zero.
ResidualProfile hjb_residual(const ValueCurve& curve, const Model& model);

/// Lower bound for the convexity of the ruin probability: the positive root
/// of 1/2 nu^2 z^2 x^2 + (r~ z - 1) f' x - m f'^2 is gamma(z) f'(z).
double convexity_gamma(const Model& model, double z);

struct ConvexityReport {
    bool all_pass = true;
    std::size_t n_checked = 0;
    std::size_t n_failed = 0;
    double min_slack = 0.0;           // min over z of f''(z) - gamma(z) f'(z)
    double min_relative_slack = 0.0;  // min over z of f''/(gamma f') - 1
    double worst_z = 0.0;
    double first_failure_z = -1.0;
};

/// Checks f''(z) >= gamma(z) f'(z) > 0 at every interior node.
ConvexityReport convexity_report(const ValueCurve& curve, const Model& model);

}  // namespace ruin
