#include "ruin/duality.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ruin {

namespace {

// Position inside [at(k-1), at(k)] where the stored slope equals `slope`,
// for non-increasing slopes. Ties resolve to the leftmost index.
double invert_decreasing_slope(const ValueCurve& c, double slope) {
    const auto& d1 = c.d1;
    auto it = std::partition_point(d1.begin(), d1.end(), [&](double s) { return s > slope; });
    if (it == d1.begin()) return c.grid.lower;
    if (it == d1.end()) return c.grid.upper;
    const std::size_t k = static_cast<std::size_t>(it - d1.begin());
    const double hi = d1[k - 1], lo = d1[k];
    const double t = hi == lo ? 0.0 : (hi - slope) / (hi - lo);
    return c.grid.at(k - 1) + t * c.grid.h();
}

// Same for non-decreasing slopes.
double invert_increasing_slope(const ValueCurve& c, double slope) {
    const auto& d1 = c.d1;
    auto it = std::partition_point(d1.begin(), d1.end(), [&](double s) { return s < slope; });
    if (it == d1.begin()) return c.grid.lower;
    if (it == d1.end()) return c.grid.upper;
    const std::size_t k = static_cast<std::size_t>(it - d1.begin());
    const double lo = d1[k - 1], hi = d1[k];
    const double t = hi == lo ? 0.0 : (slope - lo) / (hi - lo);
    return c.grid.at(k - 1) + t * c.grid.h();
}

// Local slope of d1 at a point, from the cell containing it.
double cell_slope_of_d1(const ValueCurve& c, double x) {
    const std::size_t k = c.grid.cell(x);
    return (c.d1[k + 1] - c.d1[k]) / c.grid.h();
}

}  // namespace

ConjugatePoint legendre_at(const DualSolution& sol, double z) {
    if (z >= sol.M) return {0.0, sol.boundary.y_M};
    if (z <= 0.0) return {1.0, sol.boundary.y_0};
    const double y_star = invert_decreasing_slope(sol.curve, z);
    return {sol.curve.value_at(y_star) - z * y_star, y_star};
}

ValueCurve legendre_concave(const DualSolution& sol, std::size_t n) {
    const double M = sol.M;
    const auto& d1 = sol.curve.d1;
    constexpr double slope_tol = 1e-9;
    if (d1.empty() || d1.front() < M - slope_tol * M || d1.back() > slope_tol * M) {
        std::ostringstream msg;
        msg << "dual slope range [" << (d1.empty() ? 0.0 : d1.back()) << ", " << (d1.empty() ? 0.0 : d1.front())
            << "] does not cover [0, " << M << "]";
        throw SolverError(msg.str());
    }
    if (n == 0) n = sol.curve.grid.n;

    ValueCurve out;
    out.grid = Grid::make(0.0, M, n);
    out.kind = CurveKind::dual_transform;
    out.values.resize(n);
    out.d1.resize(n);
    out.d2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = out.grid.at(i);
        const ConjugatePoint p = legendre_at(sol, z);
        out.values[i] = p.value;
        out.d1[i] = -p.argmax;
        if (i == 0) {
            out.d2[i] = -1.0 / sol.ddg_at_y0;
        } else if (i + 1 == n) {
            out.d2[i] = -1.0 / sol.ddg_at_yM;
        } else {
            out.d2[i] = -1.0 / cell_slope_of_d1(sol.curve, p.argmax);
        }
    }
    // Exact endpoint identities.
    out.values.front() = 1.0;
    out.values.back() = 0.0;
    return out;
}

FreeBoundary boundary_from_primal(const ValueCurve& primal) {
    if (primal.kind != CurveKind::primal_M) throw std::invalid_argument("boundary_from_primal needs a primal_M curve");
    if (primal.d1.size() != primal.grid.n || primal.grid.n < 3 || !std::isfinite(primal.d1.front()) ||
        !std::isfinite(primal.d1.back()))
        throw std::invalid_argument("primal curve lacks endpoint derivative estimates");
    return FreeBoundary{-primal.d1.back(), -primal.d1.front()};
}

DualityReport biconjugate_check(const DualSolution& sol, const ValueCurve& primal) {
    DualityReport report;
    report.h_primal = primal.grid.h();
    report.h_dual = sol.curve.grid.h();

    const ValueCurve transform = legendre_concave(sol, primal.grid.n);
    for (std::size_t i = 0; i < primal.grid.n; ++i) {
        const double z = primal.grid.at(i);
        const double phi = z <= transform.grid.upper ? transform.value_at(z) : 0.0;
        report.sup_gap = std::max(report.sup_gap, std::abs(phi - primal.values[i]));
    }

    if (primal.kind == CurveKind::primal_M) {
        const FreeBoundary fb = boundary_from_primal(primal);
        report.boundary_gap_yM = std::abs(fb.y_M - sol.boundary.y_M);
        report.boundary_gap_y0 = std::abs(fb.y_0 - sol.boundary.y_0);
    }

    // Transform of the transform over [y_M, y_0]: min_z [Phi(z) + z y].
    const auto& g = sol.curve;
    for (std::size_t i = 0; i < g.grid.n; ++i) {
        const double y = g.grid.at(i);
        if (y < sol.boundary.y_M || y > sol.boundary.y_0) continue;
        const double z_star = invert_increasing_slope(transform, -y);
        const double back = transform.value_at(z_star) + z_star * y;
        report.biconjugate_gap = std::max(report.biconjugate_gap, std::abs(back - g.values[i]));
    }

    const double M = sol.M;
    for (int k = 1; k <= 10; ++k) {
        SlopeCheck s;
        s.z = M * k / 11.0;
        const ConjugatePoint p = legendre_at(sol, s.z);
        s.primal_d2 = primal.d2_at(s.z);
        s.dual_d2_inverse = -1.0 / g.d2_at(p.argmax);
        s.relative_error = std::abs(s.primal_d2 - s.dual_d2_inverse) / std::abs(s.dual_d2_inverse);
        s.primal_d1 = primal.d1_at(s.z);
        s.minus_I = -p.argmax;
        s.slope_error = std::abs(s.primal_d1 - s.minus_I);
        s.passed = s.relative_error <= kSlopeCurvatureRelTol && s.slope_error <= kSlopeAbsTol;
        report.slope_checks.push_back(s);
    }
    return report;
}

}  // namespace ruin
