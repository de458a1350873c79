#include "ruin/fbp_dual.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

namespace ruin {

namespace {

using State = std::array<double, 2>;  // (g, g')
namespace odeint = boost::numeric::odeint;

struct ConcavityBreakdown {
    double y;
};

double require_root(const Model& model, double y, double g, double dg) {
    const auto root = dual_second_derivative(model, y, g, dg);
    if (!root) throw ConcavityBreakdown{y};
    return *root;
}

// Drives the dense-output Dormand-Prince stepper from y_start until g' turns
// nonpositive; `on_step` sees every accepted step before the stop test.
template <class OnStep>
ShootRecord integrate(const Model& model, double M, double y_start, const ShootOptions& options, OnStep&& on_step) {
    const double cap = shooting_cap(model, M);
    auto rhs = [&](const State& x, State& dxdy, double y) {
        dxdy[0] = x[1];
        dxdy[1] = require_root(model, y, x[0], x[1]);
    };

    ShootRecord rec;
    rec.y_start = y_start;
    State x{M * y_start, M};
    rec.path.push_back({y_start, x[0], x[1], require_root(model, y_start, x[0], x[1])});

    auto stepper = odeint::make_dense_output(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State>());
    stepper.initialize(x, y_start, 1e-3 * y_start);

    for (;;) {
        const auto [y0, y1] = stepper.do_step(rhs);
        on_step(stepper, y0, y1);
        const State& x1 = stepper.current_state();
        if (x1[1] <= 0.0) {
            // Illinois-modified regula falsi on g'(y) = 0 over the last step.
            double lo = y0, hi = y1;
            State s_lo, s_hi, s_mid;
            stepper.calc_state(lo, s_lo);
            s_hi = x1;
            double f_lo = s_lo[1], f_hi = s_hi[1];
            int side = 0;
            double y_star = hi;
            for (int it = 0; it < 200 && f_hi != 0.0; ++it) {
                y_star = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
                if (!(y_star > lo && y_star < hi)) y_star = 0.5 * (lo + hi);
                stepper.calc_state(y_star, s_mid);
                const double f_mid = s_mid[1];
                if (f_mid == 0.0 || (hi - lo) <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
                    hi = y_star;
                    s_hi = s_mid;
                    break;
                }
                if ((f_mid > 0.0) == (f_lo > 0.0)) {
                    lo = y_star;
                    f_lo = f_mid;
                    if (side == -1) f_hi *= 0.5;
                    side = -1;
                } else {
                    hi = y_star;
                    f_hi = f_mid;
                    s_hi = s_mid;
                    if (side == 1) f_lo *= 0.5;
                    side = 1;
                }
            }
            // Take whichever endpoint of the final bracket is closer to zero.
            State s_final = s_hi;
            double y_final = hi;
            if (std::abs(f_lo) < std::abs(s_hi[1])) {
                stepper.calc_state(lo, s_final);
                y_final = lo;
            }
            rec.y_stop = y_final;
            rec.g_at_stop = s_final[0];
            rec.dg_at_stop = s_final[1];
            rec.path.push_back({y_final, s_final[0], s_final[1], require_root(model, y_final, s_final[0], 0.0)});
            return rec;
        }
        if (y1 > cap) {
            std::ostringstream msg;
            msg << "no pasting point: g' still " << x1[1] << " at y = " << y1 << " (cap " << cap << ")";
            throw SolverError(msg.str(), x1[1]);
        }
        rec.path.push_back({y1, x1[0], x1[1], require_root(model, y1, x1[0], x1[1])});
    }
}

ShootRecord shoot_impl(const Model& model, double M, double y_start, const ShootOptions& options) {
    try {
        return integrate(model, M, y_start, options, [](auto&, double, double) {});
    } catch (const ConcavityBreakdown& e) {
        std::ostringstream msg;
        msg << "concavity breakdown: no nonpositive root for g'' at y = " << e.y;
        throw SolverError(msg.str());
    }
}

}  // namespace

double payoff_u(double M, double y) { return std::min(M * y, 1.0); }

std::optional<double> dual_second_derivative(const Model& model, double y, double g, double dg) {
    const auto& d = model.derived();
    const double lambda = model.market().lambda;
    const double A = d.m * y * y;
    const double B = -(lambda * g - y - (lambda - d.r_tilde) * y * dg);
    const double C = -0.5 * model.nu2() * dg * dg;
    const double disc = B * B - 4.0 * A * C;
    if (!(disc >= 0.0)) return std::nullopt;
    const double sq = std::sqrt(disc);
    if (B > 0.0) {
        if (A > 0.0) return (-B - sq) / (2.0 * A);
        return std::nullopt;  // linear case with a positive root only
    }
    const double denom = -B + sq;
    if (denom > 0.0) return 2.0 * C / denom;
    // B = 0 and C = 0: the double root 0 is the limit of the concave branch.
    if (C == 0.0) return 0.0;
    return std::nullopt;
}

double shooting_cap(const Model& model, double M) {
    return std::max(10.0 * model.market().lambda, 10.0 / M) * 10.0;
}

ShootRecord shoot_dual(const Model& model, double M, double y_M_trial, const ShootOptions& options) {
    if (!(M > 0.0)) throw std::invalid_argument("barrier M must be positive");
    if (!(y_M_trial > 0.0 && y_M_trial < 1.0 / M))
        throw std::invalid_argument("trial lower boundary must lie in (0, 1/M)");
    return shoot_impl(model, M, y_M_trial, options);
}

DualSolution solve_dual(const Model& model, double M, double tol, const DualOptions& options) {
    const double lambda = model.market().lambda;
    if (!(M > 0.0)) throw std::invalid_argument("barrier M must be positive");
    if (!(M > 1.0 / lambda)) {
        std::ostringstream msg;
        msg << "M = " << M << " does not exceed 1/lambda = " << 1.0 / lambda
            << "; the continuation region is only guaranteed non-empty for M > 1/lambda";
        throw std::invalid_argument(msg.str());
    }
    if (!(tol > 0.0)) throw std::invalid_argument("pasting tolerance must be positive");
    if (options.scan_points < 2) throw std::invalid_argument("scan needs at least 2 points");

    // F(y_M) = g(y_stop) - 1; shots that never paste are recorded as NaN.
    auto residual = [&](double y_start) {
        try {
            return shoot_impl(model, M, y_start, options.shoot).g_at_stop - 1.0;
        } catch (const SolverError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    const double delta = 1e-8 / M;
    const double lo_end = delta;
    const double hi_end = 1.0 / M - delta;
    std::vector<double> ys(options.scan_points), fs(options.scan_points);
    for (std::size_t k = 0; k < ys.size(); ++k) {
        ys[k] = lo_end + (hi_end - lo_end) * static_cast<double>(k) / static_cast<double>(ys.size() - 1);
        fs[k] = residual(ys[k]);
    }

    DualSolution sol;
    sol.M = M;
    for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
        if (std::isnan(fs[k]) || std::isnan(fs[k + 1])) continue;
        if (fs[k] == 0.0 || (fs[k] < 0.0) != (fs[k + 1] < 0.0)) sol.brackets.emplace_back(ys[k], ys[k + 1]);
    }
    if (sol.brackets.empty()) {
        std::ostringstream msg;
        msg << "degenerate continuation region: g(y_stop) - 1 has no sign change on (0, 1/M) for M = " << M;
        throw SolverError(msg.str());
    }

    // Bisection on the first bracket.
    double a = sol.brackets.front().first;
    double b = sol.brackets.front().second;
    double fa = residual(a);
    double y_root = a, f_root = fa;
    for (std::size_t it = 0; it < options.max_bisections; ++it) {
        if (std::abs(f_root) <= 0.1 * tol) break;
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double fm = residual(mid);
        if (std::isnan(fm)) throw SolverError("shooting failed inside the bracket at y_M = " + std::to_string(mid));
        y_root = mid;
        f_root = fm;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    if (!(std::abs(f_root) <= tol)) {
        std::ostringstream msg;
        msg << "value pasting residual " << std::abs(f_root) << " above tolerance " << tol;
        throw SolverError(msg.str(), std::abs(f_root));
    }

    // Final shot, sampling the grid through the dense output.
    const ShootRecord probe = shoot_impl(model, M, y_root, options.shoot);
    const double y_M = y_root;
    const double y_0 = probe.y_stop;
    const Grid grid = Grid::make(0.0, 1.1 * y_0, options.grid_n);

    ValueCurve& curve = sol.curve;
    curve.grid = grid;
    curve.kind = CurveKind::dual_game;
    curve.values.assign(grid.n, 1.0);
    curve.d1.assign(grid.n, 0.0);
    curve.d2.assign(grid.n, 0.0);
    std::size_t next = 0;
    for (; next < grid.n && grid.at(next) <= y_M; ++next) {
        curve.values[next] = M * grid.at(next);
        curve.d1[next] = M;
    }
    auto sample = [&](auto& stepper, double t0, double t1) {
        State s;
        for (; next < grid.n; ++next) {
            const double y = grid.at(next);
            if (y > t1 || y >= y_0) break;
            if (y < t0) continue;
            stepper.calc_state(y, s);
            curve.values[next] = s[0];
            curve.d1[next] = s[1];
            curve.d2[next] = require_root(model, y, s[0], s[1]);
        }
    };
    ShootRecord rec;
    try {
        rec = integrate(model, M, y_M, options.shoot, sample);
    } catch (const ConcavityBreakdown& e) {
        throw SolverError("concavity breakdown while sampling at y = " + std::to_string(e.y));
    }

    sol.boundary = {y_M, y_0};
    sol.pasting_residuals = {std::abs(rec.path.front().dg - M), std::abs(rec.dg_at_stop)};
    sol.value_residual = std::abs(rec.g_at_stop - 1.0);
    sol.ddg_at_yM = rec.path.front().ddg;
    sol.ddg_at_y0 = rec.path.back().ddg;
    return sol;
}

double AlphaCurve::at(double yq) const {
    if (y.empty() || yq < y.front() || yq > y.back()) throw std::out_of_range("control queried outside D");
    auto it = std::upper_bound(y.begin(), y.end(), yq);
    if (it == y.end()) return ratio.back();
    const std::size_t k = static_cast<std::size_t>(it - y.begin());
    if (k == 0) return ratio.front();
    const double t = (yq - y[k - 1]) / (y[k] - y[k - 1]);
    return ratio[k - 1] + t * (ratio[k] - ratio[k - 1]);
}

AlphaCurve alpha_star(const DualSolution& sol, const Model& model) {
    const auto& d = model.derived();
    const double lambda = model.market().lambda;
    const double nu = model.nu();
    const double y_M = sol.boundary.y_M;
    const double y_0 = sol.boundary.y_0;

    AlphaCurve out;
    auto push = [&](double y, double g, double dg, double ddg) {
        if (!(ddg < 0.0)) {
            std::ostringstream msg;
            msg << "strict concavity violated inside D at y = " << y << " (g'' = " << ddg << ")";
            throw SolverError(msg.str());
        }
        out.y.push_back(y);
        out.ratio.push_back(-nu * dg / ddg);
        const double K = (y - lambda * g) / dg + (lambda - d.r_tilde) * y;
        out.root.push_back((-K + std::sqrt(K * K + 2.0 * model.nu2() * d.m * y * y)) / nu);
    };

    push(y_M, sol.M * y_M, sol.M, sol.ddg_at_yM);
    const auto& c = sol.curve;
    for (std::size_t i = 0; i < c.grid.n; ++i) {
        const double y = c.grid.at(i);
        if (y <= y_M || y >= y_0) continue;
        push(y, c.values[i], c.d1[i], c.d2[i]);
    }
    // g' = 0 at y_0: both forms tend to zero.
    out.y.push_back(y_0);
    out.ratio.push_back(0.0);
    out.root.push_back(0.0);
    return out;
}

}  // namespace ruin
