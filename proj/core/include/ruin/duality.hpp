// Legendre bridge between the game value (concave, in y) and the minimum
// ruin probability (convex, in z), with cross-solver consistency checks.

#pragma once

#include <cstddef>
#include <vector>

#include "ruin/curve.hpp"
#include "ruin/fbp_dual.hpp"

namespace ruin {

struct ConjugatePoint {
    double value = 0.0;     // max_y [g(y) - z y]
    double argmax = 0.0;    // y* = I_M(z)
};

/// Convex dual of the game value at a single z, by inverting the stored
/// slope of the concave curve. Returns 0 for z >= M and 1 at z = 0.
ConjugatePoint legendre_at(const DualSolution& sol, double z);

/// Transform sampled on a uniform grid over [0, M] with n points (n = 0 uses
/// the dual grid size). d1 = -I_M(z), d2 = -I_M'(z). Throws SolverError when
/// the dual slope does not span [0, M].
ValueCurve legendre_concave(const DualSolution& sol, std::size_t n = 0);

/// Free boundary read off a primal curve: (y_M, y_0) = (-f'(M-), -f'(0+)).
FreeBoundary boundary_from_primal(const ValueCurve& primal);

struct SlopeCheck {
    double z = 0.0;
    double primal_d2 = 0.0;           // f''(z) from the primal solve
    double dual_d2_inverse = 0.0;     // -1 / g''(I_M(z))
    double relative_error = 0.0;
    double primal_d1 = 0.0;           // f'(z) from the primal solve
    double minus_I = 0.0;             // -I_M(z) from the transform
    double slope_error = 0.0;
    bool passed = false;
};

struct DualityReport {
    double sup_gap = 0.0;           // sup over [0, M] of |Legendre(g) - f|
    double boundary_gap_yM = 0.0;
    double boundary_gap_y0 = 0.0;
    double biconjugate_gap = 0.0;   // sup over [y_M, y_0] of |Legendre(Legendre(g)) - g|
    double h_primal = 0.0;
    double h_dual = 0.0;
    std::vector<SlopeCheck> slope_checks;
};

/// Relative tolerance on the second-derivative relation, absolute tolerance
/// on the first-derivative relation.
inline constexpr double kSlopeCurvatureRelTol = 0.10;
inline constexpr double kSlopeAbsTol = 1e-2;

/// Compares the transform of `sol` against a primal solve at the same (model,
/// M). Ten interior z are sampled for the derivative relations.
DualityReport biconjugate_check(const DualSolution& sol, const ValueCurve& primal);

}  // namespace ruin
