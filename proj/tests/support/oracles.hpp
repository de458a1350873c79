// Independent reference computations used only by the tests. None of these
// call into the solvers they check.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ruin/curve.hpp"
#include "ruin/model.hpp"

namespace ruin::oracle {

// Frozen values from solve_primal at n = 32001 on the reference parameters,
// M = 40 (see FrozenValuesAreCurrent in test_pde_primal.cpp).
inline constexpr double kPhi10_n32001 = 0.4468652711;
// solve_primal at n = 128001 on [0, 160], the final rung M* of
// solve_unbounded(tol = 1e-4) on the reference parameters; z = 5, 10, 20.
inline constexpr double kPhiInf5 = 0.68589335;
inline constexpr double kPhiInf10 = 0.44836940;
inline constexpr double kPhiInf20 = 0.16939047;
// rk4_free_boundary on the reference parameters, M = 40.
inline constexpr double kYM = 0.003265308994;
inline constexpr double kY0 = 0.070944555175;

/// max over grid nodes of g(y_i) - z y_i: first-order accurate in the node
/// spacing, no slope information used.
inline double grid_argmax_legendre(const ValueCurve& g, double z) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.grid.n; ++i) best = std::max(best, g.values[i] - z * g.grid.at(i));
    return best;
}

/// Investment policy from f and f' alone. Substituting
/// f'' = -excess f' / (sigma^2 pi) into the HJB gives
///   pi^2 - B pi - nu^2 z^2 / sigma^2 = 0,  B = 2 (lambda f - (r~ z - 1) f') / (excess f'),
/// and the admissible root is the positive one.
inline double policy_root_form(const Model& model, double z, double f, double df) {
    const auto& p = model.market();
    const auto& d = model.derived();
    const double B = 2.0 * (p.lambda * f - (d.r_tilde * z - 1.0) * df) / (d.excess * df);
    const double c = model.nu2() * z * z / (p.sigma * p.sigma);
    return 0.5 * (B + std::sqrt(B * B + 4.0 * c));
}

/// Concave root of m y^2 x^2 - (lambda g - y - (lambda - r~) y g') x - 1/2 nu^2 g'^2 = 0.
inline double dual_g2(const Model& model, double y, double g, double dg) {
    const double m = model.derived().m;
    const double P = model.market().lambda * g - y - (model.market().lambda - model.derived().r_tilde) * y * dg;
    const double disc = P * P + 2.0 * m * model.nu2() * y * y * dg * dg;
    return (P - std::sqrt(disc)) / (2.0 * m * y * y);
}

struct ShotEnd {
    double y_stop = 0.0;
    double g_stop = 0.0;
};

/// Classical RK4 from (y_M, M y_M, M) with fixed step until g' changes sign.
inline std::optional<ShotEnd> rk4_shoot(const Model& model, double M, double y_M, double step, double y_cap) {
    double y = y_M, g = M * y_M, dg = M;
    auto f = [&](double yy, double gg, double dd) { return dual_g2(model, yy, gg, dd); };
    while (y < y_cap) {
        const double k1g = dg, k1d = f(y, g, dg);
        const double k2g = dg + 0.5 * step * k1d, k2d = f(y + 0.5 * step, g + 0.5 * step * k1g, dg + 0.5 * step * k1d);
        const double k3g = dg + 0.5 * step * k2d, k3d = f(y + 0.5 * step, g + 0.5 * step * k2g, dg + 0.5 * step * k2d);
        const double k4g = dg + step * k3d, k4d = f(y + step, g + step * k3g, dg + step * k3d);
        const double g_next = g + step / 6.0 * (k1g + 2 * k2g + 2 * k3g + k4g);
        const double dg_next = dg + step / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
        if (!std::isfinite(g_next) || !std::isfinite(dg_next)) return std::nullopt;
        if (dg_next <= 0.0) {
            const double s = step * dg / (dg - dg_next);
            const double g2 = (dg_next - dg) / step;
            return ShotEnd{y + s, g + dg * s + 0.5 * g2 * s * s};
        }
        y += step;
        g = g_next;
        dg = dg_next;
    }
    return std::nullopt;
}

struct Boundary {
    double y_M = 0.0;
    double y_0 = 0.0;
};

/// 64-point scan of g(y_stop) - 1 over (delta, 1/M - delta), then bisection.
inline Boundary rk4_free_boundary(const Model& model, double M, double steps_per_unit_width = 40000.0) {
    const double lo_end = 1e-8 / M;
    const double hi_end = 1.0 / M - 1e-8 / M;
    const double step = (1.0 / M) / steps_per_unit_width;
    const double cap = std::max(10.0 * model.market().lambda, 10.0 / M) * 10.0;
    auto residual = [&](double yM) {
        const auto end = rk4_shoot(model, M, yM, step, cap);
        if (!end) throw std::runtime_error("oracle shot failed");
        return end->g_stop - 1.0;
    };
    double a = lo_end, fa = residual(a);
    double b = a;
    bool found = false;
    for (int k = 1; k < 64 && !found; ++k) {
        const double yb = lo_end + (hi_end - lo_end) * k / 63.0;
        const double fb = residual(yb);
        if ((fa < 0.0) != (fb < 0.0)) {
            b = yb;
            found = true;
        } else {
            a = yb;
            fa = fb;
        }
    }
    if (!found) throw std::runtime_error("oracle scan found no sign change");
    for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = residual(mid);
        if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    const double yM = 0.5 * (a + b);
    return {yM, rk4_shoot(model, M, yM, step, cap)->y_stop};
}

}  // namespace ruin::oracle
