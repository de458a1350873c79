#include "ruin/pde_primal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ruin {

namespace {

// Thomas algorithm for a strictly diagonally dominant tridiagonal system.
// lower[0] and upper[n-1] are ignored. Overwrites rhs with the solution.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs, std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    scratch.resize(n);
    double beta = diag[0];
    rhs[0] /= beta;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i + 1] * rhs[i + 1];
}

double sup_abs_diff(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

// Investment policy from the current iterate; returns true if the floor bit.
bool update_policy(const Model& model, const Grid& grid, std::span<const double> f, double floor,
                   std::vector<double>& pi) {
    const double h = grid.h();
    const double excess = model.derived().excess;
    const double sigma2 = model.market().sigma * model.market().sigma;
    bool floored = false;
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        const double d1 = (f[i + 1] - f[i - 1]) / (2.0 * h);
        double d2 = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
        if (d2 < floor) {
            d2 = floor;
            floored = true;
        }
        pi[i] = -excess * d1 / (sigma2 * d2);
    }
    return floored;
}

// One linear solve with the policy frozen. Upwind first differences keyed to
// the sign of the total drift, central second differences.
void linear_solve(const Model& model, const Grid& grid, std::span<const double> pi, std::vector<double>& f,
                  std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
                  std::vector<double>& rhs, std::vector<double>& scratch) {
    const std::size_t n = grid.n;
    const std::size_t m = n - 2;
    const double h = grid.h();
    const auto& d = model.derived();
    const double lambda = model.market().lambda;
    const double sigma2 = model.market().sigma * model.market().sigma;
    const double nu2 = model.nu2();

    lower.assign(m, 0.0);
    diag.assign(m, 0.0);
    upper.assign(m, 0.0);
    rhs.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = k + 1;
        const double z = grid.at(i);
        const double drift = (d.r_tilde * z - 1.0) + d.excess * pi[i];
        const double diffusion = 0.5 * (nu2 * z * z + sigma2 * pi[i] * pi[i]) / (h * h);
        const double lo = diffusion + std::max(-drift, 0.0) / h;
        const double up = diffusion + std::max(drift, 0.0) / h;
        lower[k] = lo;
        upper[k] = up;
        diag[k] = -(lambda + lo + up);
    }
    // f(0) = 1 enters the first row; f(M) = 0 contributes nothing.
    rhs[0] -= lower[0] * 1.0;
    solve_tridiagonal(lower, diag, upper, rhs, scratch);

    f.assign(n, 0.0);
    f[0] = 1.0;
    for (std::size_t k = 0; k < m; ++k) f[k + 1] = rhs[k];
    f[n - 1] = 0.0;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

ValueCurve solve_primal(const Model& model, double M, std::size_t n, double tol, PrimalSolveLog* log,
                        const PrimalOptions& options) {
    require(std::isfinite(M) && M > 0.0, "barrier M must be positive");
    require(n >= 101, "grid size must be at least 101");
    require(std::isfinite(tol) && tol > 0.0, "tolerance must be positive");

    const Grid grid = Grid::make(0.0, M, n);
    std::vector<double> f(n), next, pi(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) f[i] = 1.0 - grid.at(i) / M;
    f[n - 1] = 0.0;

    std::vector<double> lower, diag, upper, rhs, scratch;
    PrimalSolveLog local;
    PrimalSolveLog& out = log ? *log : local;
    out = {};

    double change = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        update_policy(model, grid, f, options.d2_floor, pi);
        linear_solve(model, grid, pi, next, lower, diag, upper, rhs, scratch);
        const double prev_change = change;
        change = sup_abs_diff(f, next);
        f.swap(next);
        out.iterations = it + 1;
        out.sup_changes.push_back(change);

        if (it >= 1 && change > 10.0 * prev_change) {
            std::ostringstream msg;
            msg << "policy iteration diverging at sweep " << it + 1 << ": change " << change << " after "
                << prev_change;
            throw SolverError(msg.str(), change);
        }
        if (change < tol) break;
    }
    if (!(change < tol)) {
        std::ostringstream msg;
        msg << "policy iteration did not converge in " << options.max_iterations << " sweeps; last change " << change;
        throw SolverError(msg.str(), change);
    }

    // The accepted iterate must be strictly convex without the floor.
    out.floor_active = update_policy(model, grid, f, options.d2_floor, pi);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d2 = f[i + 1] - 2.0 * f[i] + f[i - 1];
        if (!(d2 > 0.0) || out.floor_active) {
            std::ostringstream msg;
            msg << "loss of convexity at z = " << grid.at(i) << " (second difference " << d2 << ")";
            throw SolverError(msg.str(), change);
        }
    }

    ValueCurve curve;
    curve.grid = grid;
    curve.kind = CurveKind::primal_M;
    curve.values = std::move(f);
    detail::finite_differences(grid, curve.values, curve.d1, curve.d2);
    return curve;
}

namespace {

std::size_t points_for(double M, double h) { return static_cast<std::size_t>(std::llround(M / h)) + 1; }

// Same spacing, so node i of the short curve sits at node i of the long one.
double doubling_gap(const ValueCurve& shorter, const ValueCurve& longer) {
    double gap = 0.0;
    for (std::size_t i = 0; i < longer.grid.n; ++i) {
        const double short_value = i < shorter.grid.n ? shorter.values[i] : 0.0;
        gap = std::max(gap, std::abs(longer.values[i] - short_value));
    }
    return gap;
}

void check_ladder_options(const UnboundedOptions& options) {
    require(options.M_start > 0.0 && options.h > 0.0, "ladder needs positive M_start and h");
}

}  // namespace

UnboundedSolution solve_unbounded(const Model& model, double tol, const UnboundedOptions& options) {
    require(std::isfinite(tol) && tol > 0.0, "tolerance must be positive");
    check_ladder_options(options);

    UnboundedSolution out;
    double M = options.M_start;
    ValueCurve current = solve_primal(model, M, points_for(M, options.h), options.solve_tol);
    for (std::size_t rung = 0; rung < options.max_rungs; ++rung) {
        const double M2 = 2.0 * M;
        ValueCurve doubled = solve_primal(model, M2, points_for(M2, options.h), options.solve_tol);
        const double gap = doubling_gap(current, doubled);
        out.ladder.push_back({M, current.grid.n, gap});

        if (out.ladder.size() >= 2 && !(gap < out.ladder[out.ladder.size() - 2].sup_gap)) {
            std::ostringstream msg;
            msg << "M-ladder failed to contract at M = " << M << ": gap " << gap << " after "
                << out.ladder[out.ladder.size() - 2].sup_gap;
            throw SolverError(msg.str(), gap);
        }
        if (gap < tol) {
            out.M_star = M;
            out.curve = std::move(current);
            out.curve.kind = CurveKind::primal_unbounded;
            return out;
        }
        current = std::move(doubled);
        M = M2;
    }
    std::ostringstream msg;
    msg << "M-ladder did not reach tolerance " << tol << " within " << options.max_rungs << " rungs";
    throw SolverError(msg.str(), out.ladder.empty() ? 0.0 : out.ladder.back().sup_gap);
}

std::vector<LadderRung> convergence_ladder(const Model& model, std::size_t rungs, const UnboundedOptions& options) {
    check_ladder_options(options);
    require(rungs >= 1, "ladder needs at least one rung");
    std::vector<LadderRung> out;
    double M = options.M_start;
    ValueCurve current = solve_primal(model, M, points_for(M, options.h), options.solve_tol);
    for (std::size_t k = 0; k < rungs; ++k) {
        ValueCurve doubled = solve_primal(model, 2.0 * M, points_for(2.0 * M, options.h), options.solve_tol);
        out.push_back({M, current.grid.n, doubling_gap(current, doubled)});
        current = std::move(doubled);
        M *= 2.0;
    }
    return out;
}

PolicyCurve feedback_policy(const ValueCurve& curve, const Model& model) {
    if (curve.kind != CurveKind::primal_M && curve.kind != CurveKind::primal_unbounded)
        throw std::invalid_argument("feedback_policy needs a primal curve");
    const double excess = model.derived().excess;
    const double sigma2 = model.market().sigma * model.market().sigma;
    const std::size_t n = curve.grid.n;

    PolicyCurve policy{curve.grid, std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const double d2 = curve.d2[i];
        if (!(d2 > 0.0)) {
            if (i == 0 || i + 1 == n) continue;
            std::ostringstream msg;
            msg << "convexity violated at z = " << curve.grid.at(i) << " (f'' = " << d2 << ")";
            throw SolverError(msg.str());
        }
        policy.pi[i] = excess == 0.0 ? 0.0 : -excess * curve.d1[i] / (sigma2 * d2);
    }
    return policy;
}

Lift lift_2d(const ValueCurve& curve, const Model& model, double w, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("consumption rate must be positive");
    if (!(w >= 0.0)) throw std::invalid_argument("wealth must be nonnegative");
    const double z = w / c;
    if (z > curve.grid.upper) {
        std::ostringstream msg;
        msg << "w/c = " << z << " beyond curve domain [0, " << curve.grid.upper << "]; refusing to extrapolate";
        throw std::out_of_range(msg.str());
    }
    const auto& p = model.market();
    const double pi_tilde = reduced_policy_at(curve, model, z);
    return Lift{curve.value_at(z), c * (pi_tilde + p.rho * (p.b / p.sigma) * z)};
}

double reduced_policy_at(const ValueCurve& curve, const Model& model, double z) {
    const double excess = model.derived().excess;
    if (excess == 0.0) return 0.0;
    const double sigma = model.market().sigma;
    return -excess * curve.d1_at(z) / (sigma * sigma * curve.d2_at(z));
}

double ResidualProfile::sup() const {
    double s = 0.0;
    for (double r : residual) s = std::max(s, std::abs(r));
    return s;
}

ResidualProfile hjb_residual(const ValueCurve& curve, const Model& model) {
    const auto& d = model.derived();
    const double lambda = model.market().lambda;
    const double nu2 = model.nu2();
    ResidualProfile out;
    for (std::size_t i = 1; i + 1 < curve.grid.n; ++i) {
        const double z = curve.grid.at(i);
        const double f = curve.values[i];
        const double f1 = curve.d1[i];
        const double f2 = curve.d2[i];
        double control_term;  // min over pi of excess pi f' + 1/2 sigma^2 pi^2 f''
        if (f1 == 0.0 || d.m == 0.0)
            control_term = 0.0;
        else if (f2 > 0.0)
            control_term = -d.m * f1 * f1 / f2;
        else
            control_term = -std::numeric_limits<double>::infinity();
        out.z.push_back(z);
        out.residual.push_back(lambda * f - (d.r_tilde * z - 1.0) * f1 - 0.5 * nu2 * z * z * f2 - control_term);
    }
    return out;
}

double convexity_gamma(const Model& model, double z) {
    const auto& d = model.derived();
    const double x = d.r_tilde * z - 1.0;
    const double q = 2.0 * d.m * model.nu2() * z * z;
    const double root = std::sqrt(x * x + q);
    // Rationalised branch avoids cancellation for small z.
    if (x < 0.0) return -2.0 * d.m / (root - x);
    return (-x - root) / (model.nu2() * z * z);
}

ConvexityReport convexity_report(const ValueCurve& curve, const Model& model) {
    if (curve.kind != CurveKind::primal_M && curve.kind != CurveKind::primal_unbounded)
        throw std::invalid_argument("convexity_report needs a primal curve");
    ConvexityReport report;
    report.min_slack = std::numeric_limits<double>::infinity();
    report.min_relative_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < curve.grid.n; ++i) {
        const double z = curve.grid.at(i);
        const double bound = convexity_gamma(model, z) * curve.d1[i];
        const double slack = curve.d2[i] - bound;
        const double relative = bound > 0.0 ? curve.d2[i] / bound - 1.0 : -std::numeric_limits<double>::infinity();
        ++report.n_checked;
        if (slack < report.min_slack) {
            report.min_slack = slack;
            report.worst_z = z;
        }
        report.min_relative_slack = std::min(report.min_relative_slack, relative);
        if (!(slack >= 0.0 && bound > 0.0)) {
            if (report.n_failed == 0) report.first_failure_z = z;
            ++report.n_failed;
            report.all_pass = false;
        }
    }
    return report;
}

}  // namespace ruin
