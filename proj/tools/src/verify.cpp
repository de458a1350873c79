#include "ruin_cli/verify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "ruin/fbp_dual.hpp"

namespace ruin::cli {

Check Check::at_most(std::string name, double measured, double bound) {
    return {std::move(name), measured, "<=", 0.0, bound, measured <= bound};
}
Check Check::below(std::string name, double measured, double bound) {
    return {std::move(name), measured, "<", 0.0, bound, measured < bound};
}
Check Check::at_least(std::string name, double measured, double bound) {
    return {std::move(name), measured, ">=", bound, 0.0, measured >= bound};
}
Check Check::above(std::string name, double measured, double bound) {
    return {std::move(name), measured, ">", bound, 0.0, measured > bound};
}
Check Check::within(std::string name, double measured, double lo, double hi) {
    return {std::move(name), measured, "in", lo, hi, measured >= lo && measured <= hi};
}

bool VerificationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

std::string slug(const std::string& text) {
    std::string s;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else if (c == '*')
            s += "_star";
        else if (!s.empty() && s.back() != '_')
            s += '_';
    }
    while (!s.empty() && s.back() == '_') s.pop_back();
    return s;
}

void primal_checks(const ValueCurve& f, const Model& model, VerificationReport& rep) {
    const std::size_t n = f.grid.n;
    rep.checks.push_back(
        Check::at_most("primal.boundary_values", std::max(std::abs(f.values.front() - 1.0), std::abs(f.values.back())), 0.0));

    double max_d1 = -std::numeric_limits<double>::infinity();
    double min_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < n; ++i) max_d1 = std::max(max_d1, f.values[i + 1] - f.values[i]);
    for (std::size_t i = 1; i + 1 < n; ++i) min_d2 = std::min(min_d2, f.values[i + 1] - 2.0 * f.values[i] + f.values[i - 1]);
    rep.checks.push_back(Check::below("primal.max_first_difference", max_d1, 0.0));
    rep.checks.push_back(Check::above("primal.min_second_difference", min_d2, 0.0));

    const ConvexityReport conv = convexity_report(f, model);
    rep.checks.push_back(Check::at_most("primal.convexity_bound_failures", static_cast<double>(conv.n_failed), 0.0));

    const double h = f.grid.h();
    rep.checks.push_back(Check::at_most("primal.residual_sup", hjb_residual(f, model).sup(), kResidualConstant * h));
}

void residual_study(const RunConfig& cfg, const Model& model, VerificationReport& rep) {
    const ValueCurve coarse = solve_primal(model, cfg.M, cfg.grid_n, cfg.tol);
    const ValueCurve fine = solve_primal(model, cfg.M, 2 * cfg.grid_n - 1, cfg.tol);
    const double ratio = hjb_residual(coarse, model).sup() / hjb_residual(fine, model).sup();
    rep.checks.push_back(Check::within("primal.residual_halving_ratio", ratio, kResidualRatioLow, kResidualRatioHigh));
}

void dual_checks(const DualSolution& sol, const Model& model, double M, VerificationReport& rep) {
    const double lambda = model.market().lambda;
    const FreeBoundary& fb = sol.boundary;
    rep.checks.push_back(Check::at_most("dual.pasting_residual_yM", sol.pasting_residuals.first, kPastingTol));
    rep.checks.push_back(Check::at_most("dual.pasting_residual_y0", sol.pasting_residuals.second, kPastingTol));
    rep.checks.push_back(Check::above("dual.order_1_over_M_minus_yM", 1.0 / M - fb.y_M, 0.0));
    rep.checks.push_back(Check::above("dual.order_lambda_minus_1_over_M", lambda - 1.0 / M, 0.0));
    rep.checks.push_back(Check::at_least("dual.order_y0_minus_lambda", fb.y_0 - lambda, 0.0));

    const AlphaCurve alpha = alpha_star(sol, model);
    const double bound_coeff = std::sqrt(2.0 * model.derived().m);
    double min_alpha = std::numeric_limits<double>::infinity();
    double form_gap = 0.0;
    double max_ratio = 0.0;
    std::size_t over = 0;
    std::size_t interior = 0;
    for (std::size_t i = 1; i + 1 < alpha.y.size(); ++i) {
        const double a = alpha.ratio[i];
        min_alpha = std::min(min_alpha, a);
        form_gap = std::max(form_gap, std::abs(a - alpha.root[i]));
        const double ratio = a / (bound_coeff * alpha.y[i]);
        max_ratio = std::max(max_ratio, ratio);
        if (ratio > 1.0) ++over;
        ++interior;
    }
    rep.checks.push_back(Check::at_least("control.alpha_min", min_alpha, 0.0));
    rep.checks.push_back(Check::at_most("control.alpha_form_gap", form_gap, kAlphaFormTol));
    rep.diagnostics.push_back({"control.alpha_bound_max_ratio", max_ratio,
                               "max of alpha*/(sqrt(2m) y) over interior nodes of D; values above 1 occur near y_M "
                               "whenever M > 1/r~"});
    rep.diagnostics.push_back({"control.alpha_bound_violations", static_cast<double>(over),
                               "interior nodes with alpha* > sqrt(2m) y, out of " + std::to_string(interior)});
}

void duality_checks(const DualityReport& d, double scale, VerificationReport& rep) {
    rep.checks.push_back(Check::at_most("duality.sup_gap", d.sup_gap, kDualityGapTol * scale));
    rep.checks.push_back(Check::at_most("duality.biconjugate_gap", d.biconjugate_gap, kDualityGapTol * scale));
    rep.checks.push_back(Check::at_most("duality.boundary_gap_yM", d.boundary_gap_yM, kBoundaryGapTol * scale));
    rep.checks.push_back(Check::at_most("duality.boundary_gap_y0", d.boundary_gap_y0, kBoundaryGapTol * scale));
    const auto failed = std::count_if(d.slope_checks.begin(), d.slope_checks.end(), [](const SlopeCheck& s) { return !s.passed; });
    rep.checks.push_back(Check::at_most("duality.slope_check_failures", static_cast<double>(failed), 0.0));
}

void saddle_checks(const SaddleReport& s, VerificationReport& rep) {
    rep.checks.push_back(Check::at_least("saddle.immediate_stop", s.immediate_stop - s.target, 0.0));
    const auto& eq = s.equilibrium;
    rep.checks.push_back(Check::at_most("mc.game_gap", std::abs(eq.sim.estimate - s.target), eq.tolerance));
    for (const auto& d : s.deviations) {
        const double gap = d.sim.estimate - s.target;
        if (d.player == "stopper")
            rep.checks.push_back(Check::at_least("saddle." + slug(d.name), gap, -d.tolerance));
        else
            rep.checks.push_back(Check::at_most("saddle." + slug(d.name), gap, d.tolerance));
    }
}

}  // namespace

VerificationReport run_verification(const RunConfig& cfg, const PrimalOutcome* supplied) {
    const Model model(cfg.params);
    VerificationReport rep;

    PrimalOutcome solved;
    if (!supplied) {
        solved.curve = solve_primal(model, cfg.M, cfg.grid_n, cfg.tol, &solved.log);
        solved.policy = feedback_policy(solved.curve, model);
    }
    const PrimalOutcome& primal = supplied ? *supplied : solved;
    if (std::abs(primal.curve.grid.upper - cfg.M) > 1e-12 * cfg.M || primal.curve.grid.lower != 0.0)
        throw std::invalid_argument("primal curve spans [" + std::to_string(primal.curve.grid.lower) + ", " +
                                    std::to_string(primal.curve.grid.upper) + "] but the config has M = " +
                                    std::to_string(cfg.M));

    rep.h_primal = primal.curve.grid.h();
    rep.h_scale = std::max(1.0, rep.h_primal / kReferenceSpacing);
    primal_checks(primal.curve, model, rep);
    residual_study(cfg, model, rep);

    DualOptions dual_opts;
    dual_opts.grid_n = cfg.grid_n;
    const DualSolution sol = solve_dual(model, cfg.M, cfg.tol, dual_opts);
    rep.h_dual = sol.curve.grid.h();
    dual_checks(sol, model, cfg.M, rep);

    rep.duality = biconjugate_check(sol, primal.curve);
    duality_checks(rep.duality, rep.h_scale, rep);

    const SimResult ruin = simulate_ruin(model, cfg.M, primal.policy, cfg.z0, cfg.sim);
    rep.checks.push_back(Check::at_most("mc.ruin_gap", std::abs(ruin.estimate - primal.curve.value_at(cfg.z0)),
                                        ruin.tolerance(kEulerAllowance)));

    const double y0 = 0.5 * (sol.boundary.y_M + sol.boundary.y_0);
    rep.saddle = saddle_test(model, cfg.M, sol, y0, cfg.sim);
    saddle_checks(rep.saddle, rep);
    return rep;
}

}  // namespace ruin::cli
