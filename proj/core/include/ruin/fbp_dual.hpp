// Controller-and-stopper game value: free-boundary problem located by
// one-parameter shooting with smooth pasting.
//
// On the continuation region D = (y_M, y_0) the value g solves
//   lambda g = y + (lambda - r~) y g' + m y^2 g'' - 1/2 nu^2 g'^2 / g''
// with g = u_M = min(M y, 1) off D and C^1 pasting at both ends.

#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "ruin/curve.hpp"
#include "ruin/errors.hpp"
#include "ruin/model.hpp"

namespace ruin {

/// Obstacle paid to the controller when the game is stopped.
double payoff_u(double M, double y);

struct FreeBoundary {
    double y_M = 0.0;
    double y_0 = 0.0;
};

/// Nonpositive root g'' of m y^2 x^2 - (lambda g - y - (lambda - r~) y g') x
/// - 1/2 nu^2 g'^2 = 0, or nullopt when the concave branch does not exist.
std::optional<double> dual_second_derivative(const Model& model, double y, double g, double dg);

struct ShootPoint {
    double y = 0.0;
    double g = 0.0;
    double dg = 0.0;
    double ddg = 0.0;
};

struct ShootRecord {
    double y_start = 0.0;
    double y_stop = 0.0;
    double g_at_stop = 0.0;
    double dg_at_stop = 0.0;
    std::vector<ShootPoint> path;  // accepted integrator steps, start and stop included
};

struct ShootOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
};

/// Hard cap on the shooting variable: max(10 lambda, 10 / M) * 10.
double shooting_cap(const Model& model, double M);

/// Integrates from (y_M_trial, M y_M_trial, M) until g' first reaches zero.
/// Throws SolverError("no pasting point ...") past the cap and on concavity
/// breakdown.
ShootRecord shoot_dual(const Model& model, double M, double y_M_trial, const ShootOptions& options = {});

struct DualSolution {
    ValueCurve curve;  // kind dual_game on [0, 1.1 y_0]
    FreeBoundary boundary;
    /// |g'(y_M) - M| and |g'(y_0)| at the shooting solution.
    std::pair<double, double> pasting_residuals{0.0, 0.0};
    /// |g(y_0) - 1|, the quantity the root find drives below tol.
    double value_residual = 0.0;
    double M = 0.0;
    /// g'' just inside D at each end (the stored curve carries 0 off D).
    double ddg_at_yM = 0.0;
    double ddg_at_y0 = 0.0;
    /// Every sign change of g(y_stop) - 1 seen by the bracketing scan.
    std::vector<std::pair<double, double>> brackets;
};

struct DualOptions {
    std::size_t grid_n = 4001;
    std::size_t scan_points = 64;
    std::size_t max_bisections = 200;
    ShootOptions shoot{};
};

/// Finds y_M with g(y_stop) = 1 by a bracketing scan of (delta, 1/M - delta)
/// followed by bisection, then assembles the value on a uniform grid.
/// Throws std::invalid_argument when M <= 1/lambda and SolverError when no
/// sign change exists.
DualSolution solve_dual(const Model& model, double M, double tol, const DualOptions& options = {});

/// Optimal control of the game on D, in the ratio form
/// -nu g'/g'' and in the root form obtained by eliminating g'' with the ODE.
struct AlphaCurve {
    std::vector<double> y;
    std::vector<double> ratio;
    std::vector<double> root;

    /// Linear interpolation of the ratio form; y must lie in [y.front(), y.back()].
    double at(double yq) const;
};

/// Nodes are y_M, every grid node strictly inside D, and y_0. Throws
/// SolverError if g'' >= 0 anywhere inside D.
AlphaCurve alpha_star(const DualSolution& sol, const Model& model);

}  // namespace ruin
