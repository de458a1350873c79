// Acceptance run on the reference parameters. Prints one line per criterion
// and exits 0 when the set of failing criteria equals the --expect-fail set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "ruin/duality.hpp"
#include "ruin/fbp_dual.hpp"
#include "ruin/mc_sim.hpp"
#include "ruin/pde_primal.hpp"
#include "ruin_cli/commands.hpp"
#include "ruin_cli/run_config.hpp"

using namespace ruin;
namespace fs = std::filesystem;

namespace {

constexpr double kM = 40.0;
constexpr std::size_t kGridN = 4001;
constexpr double kTol = 1e-10;
constexpr double kZ0 = 10.0;

constexpr double kShapeSeconds = 10.0;
constexpr double kResidualC = 1e-3;
constexpr double kHalvingLow = 1.3;
constexpr double kHalvingHigh = 2.7;
constexpr double kResidualSeconds = 60.0;
constexpr double kDualityTol = 5e-3;
constexpr double kDualitySeconds = 60.0;
constexpr double kBoundaryTol = 1e-2;
constexpr double kBoundarySeconds = 30.0;
constexpr double kPastingTol = 1e-8;
constexpr double kAlphaFormTol = 1e-3;
constexpr double kMcSeconds = 300.0;
constexpr double kLadderFinal = 1e-3;
constexpr double kLadderSeconds = 120.0;
constexpr double kSqrt2Slack = 1.2;  // ratio band [sqrt2 / 1.2, sqrt2 * 1.2]
constexpr std::size_t kDeterminismPaths = 2000;

struct Line {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string timing(double s, double limit) { return "time " + fmt(s) + " s (limit " + fmt(limit) + ")"; }

const Model& reference() {
    static const Model m(reference_params());
    return m;
}

const ValueCurve& phi() {
    static const ValueCurve c = solve_primal(reference(), kM, kGridN, kTol);
    return c;
}

const DualSolution& game() {
    static const DualSolution s = solve_dual(reference(), kM, kTol);
    return s;
}

double midpoint() { return 0.5 * (game().boundary.y_M + game().boundary.y_0); }

SimConfig reference_sim() { return SimConfig{}; }

Line shape() {
    Stopwatch clock;
    const ValueCurve f = solve_primal(reference(), kM, kGridN, kTol);
    const double t = clock.seconds();
    double max_d1 = -INFINITY, min_d2 = INFINITY;
    for (std::size_t i = 0; i + 1 < f.grid.n; ++i) max_d1 = std::max(max_d1, f.values[i + 1] - f.values[i]);
    for (std::size_t i = 1; i + 1 < f.grid.n; ++i)
        min_d2 = std::min(min_d2, f.values[i + 1] - 2.0 * f.values[i] + f.values[i - 1]);
    const bool ends = f.values.front() == 1.0 && f.values.back() == 0.0;
    return {ends && max_d1 < 0.0 && min_d2 > 0.0 && t < kShapeSeconds,
            "phi(0)=" + fmt(f.values.front()) + " phi(M)=" + fmt(f.values.back()) + " max diff1 " + fmt(max_d1) +
                " min diff2 " + fmt(min_d2) + "; " + timing(t, kShapeSeconds)};
}

Line residual() {
    Stopwatch clock;
    const double r1 = hjb_residual(phi(), reference()).sup();
    const ValueCurve fine = solve_primal(reference(), kM, 2 * kGridN - 1, kTol);
    const double r2 = hjb_residual(fine, reference()).sup();
    const double t = clock.seconds();
    const double bound = kResidualC * phi().grid.h();
    const double ratio = r1 / r2;
    return {r1 <= bound && ratio >= kHalvingLow && ratio <= kHalvingHigh && t < kResidualSeconds,
            "sup residual " + fmt(r1) + " <= " + fmt(bound) + ", halving ratio " + fmt(ratio) + " in [" +
                fmt(kHalvingLow) + ", " + fmt(kHalvingHigh) + "]; " + timing(t, kResidualSeconds)};
}

Line duality() {
    Stopwatch clock;
    const DualityReport rep = biconjugate_check(solve_dual(reference(), kM, kTol), phi());
    const double t = clock.seconds();
    return {rep.sup_gap <= kDualityTol && rep.biconjugate_gap <= kDualityTol && t < kDualitySeconds,
            "sup|Legendre - phi| " + fmt(rep.sup_gap) + ", biconjugate gap " + fmt(rep.biconjugate_gap) +
                " (tol " + fmt(kDualityTol) + "); " + timing(t, kDualitySeconds)};
}

Line boundary() {
    Stopwatch clock;
    const DualSolution s = solve_dual(reference(), kM, kTol);
    const FreeBoundary from_primal = boundary_from_primal(phi());
    const double t = clock.seconds();
    const double gm = std::abs(s.boundary.y_M - from_primal.y_M);
    const double g0 = std::abs(s.boundary.y_0 - from_primal.y_0);
    const double lambda = reference().market().lambda;
    const bool order = s.boundary.y_M < 1.0 / kM && 1.0 / kM < lambda && lambda <= s.boundary.y_0;
    return {gm <= kBoundaryTol && g0 <= kBoundaryTol && order && t < kBoundarySeconds,
            "y_M " + fmt(s.boundary.y_M) + " gap " + fmt(gm) + ", y_0 " + fmt(s.boundary.y_0) + " gap " + fmt(g0) +
                " (tol " + fmt(kBoundaryTol) + "), ordering " + (order ? "holds" : "violated") + "; " +
                timing(t, kBoundarySeconds)};
}

Line pasting() {
    const auto [at_yM, at_y0] = game().pasting_residuals;
    return {at_yM <= kPastingTol && at_y0 <= kPastingTol,
            "|g'(y_M) - M| " + fmt(at_yM) + ", |g'(y_0)| " + fmt(at_y0) + " (tol " + fmt(kPastingTol) + ")"};
}

Line control_bound() {
    const AlphaCurve a = alpha_star(game(), reference());
    const double c = std::sqrt(2.0 * reference().derived().m);
    double min_alpha = INFINITY, max_ratio = 0.0, form_gap = 0.0, worst_y = 0.0;
    std::size_t over = 0;
    for (std::size_t i = 1; i + 1 < a.y.size(); ++i) {
        min_alpha = std::min({min_alpha, a.ratio[i], a.root[i]});
        form_gap = std::max(form_gap, std::abs(a.ratio[i] - a.root[i]));
        const double q = a.ratio[i] / (c * a.y[i]);
        if (q > 1.0) ++over;
        if (q > max_ratio) {
            max_ratio = q;
            worst_y = a.y[i];
        }
    }
    return {min_alpha >= 0.0 && over == 0 && form_gap <= kAlphaFormTol,
            "min alpha " + fmt(min_alpha) + ", max alpha/(sqrt(2m) y) " + fmt(max_ratio) + " at y=" + fmt(worst_y) +
                " (" + std::to_string(over) + " of " + std::to_string(a.y.size() - 2) +
                " points above 1), form gap " + fmt(form_gap)};
}

Line convexity() {
    const ConvexityReport rep = convexity_report(phi(), reference());
    bool positive = true;
    for (std::size_t i = 0; i < phi().grid.n; ++i) {
        const double z = phi().grid.at(i);
        if (z > 0.0 && z < kM) positive = positive && convexity_gamma(reference(), z) * phi().d1[i] > 0.0;
    }
    return {rep.all_pass && positive, std::to_string(rep.n_failed) + " of " + std::to_string(rep.n_checked) +
                                          " points below gamma*d1, min slack " + fmt(rep.min_slack) +
                                          ", gamma*d1 > 0 " + (positive ? "everywhere" : "violated")};
}

Line mc_primal() {
    const PolicyCurve policy = feedback_policy(phi(), reference());
    const double target = phi().value_at(kZ0);
    Stopwatch clock;
    const SimResult coarse = simulate_ruin(reference(), kM, policy, kZ0, reference_sim());
    const double t = clock.seconds();
    SimConfig half = reference_sim();
    half.dt /= 2.0;
    const SimResult fine = simulate_ruin(reference(), kM, policy, kZ0, half);
    const double gap = std::abs(coarse.estimate - target);
    const double gap_half = std::abs(fine.estimate - target);
    const double tol = coarse.tolerance(kEulerAllowance);
    return {gap <= tol && gap_half < gap && t < kMcSeconds,
            "gap " + fmt(gap) + " <= " + fmt(tol) + " (SE " + fmt(coarse.std_error) + "), dt/2 gap " + fmt(gap_half) +
                (gap_half < gap ? " shrinks" : " does not shrink") + "; " + timing(t, kMcSeconds)};
}

Line mc_game() {
    Stopwatch clock;
    const SimResult r = simulate_game(reference(), kM, game(), midpoint(), reference_sim());
    const double t = clock.seconds();
    const double gap = std::abs(r.estimate - game().curve.value_at(midpoint()));
    const double tol = r.tolerance(kEulerAllowance);
    return {gap <= tol && t < kMcSeconds, "y0 " + fmt(midpoint()) + " gap " + fmt(gap) + " <= " + fmt(tol) + " (SE " +
                                              fmt(r.std_error) + "); " + timing(t, kMcSeconds)};
}

Line saddle() {
    const SaddleReport rep = saddle_test(reference(), kM, game(), midpoint(), reference_sim());
    std::size_t ok = 0;
    std::string worst;
    double worst_margin = INFINITY;
    for (const DeviationResult& d : rep.deviations) {
        if (d.passed) ++ok;
        // Stopper deviations cannot lower the value, controller deviations
        // cannot raise it.
        const double gap = d.sim.estimate - rep.target;
        const double margin = d.player == "stopper" ? gap + d.tolerance : d.tolerance - gap;
        if (margin < worst_margin) {
            worst_margin = margin;
            worst = d.name;
        }
    }
    return {ok == 6 && rep.deviations.size() == 6,
            std::to_string(ok) + " of " + std::to_string(rep.deviations.size()) +
                " deviations hold; tightest '" + worst + "' margin " + fmt(worst_margin)};
}

Line ladder() {
    Stopwatch clock;
    const auto rungs = convergence_ladder(reference(), 3);
    const double t = clock.seconds();
    bool decreasing = true;
    std::string gaps;
    for (std::size_t k = 0; k < rungs.size(); ++k) {
        if (k > 0) decreasing = decreasing && rungs[k].sup_gap < rungs[k - 1].sup_gap;
        gaps += (k ? ", " : "") + fmt(rungs[k].sup_gap);
    }
    const double last = rungs.back().sup_gap;
    return {decreasing && last < kLadderFinal && t < kLadderSeconds,
            "sup|phi_2M - phi_M| at M=40,80,160: " + gaps + (decreasing ? " (decreasing)" : " (not decreasing)") +
                ", final < " + fmt(kLadderFinal) + "; " + timing(t, kLadderSeconds)};
}

Line lift() {
    const UnboundedSolution u = solve_unbounded(reference(), 1e-4);
    const SimConfig cfg = reference_sim();
    const SimResult two = simulate_ruin_2d(reference(), u.curve, kZ0, 1.0, cfg);
    const SimResult scaled = simulate_ruin_2d(reference(), u.curve, 10.0 * kZ0, 10.0, cfg);
    const SimResult one = simulate_ruin(reference(), std::nullopt, feedback_policy(u.curve, reference()), kZ0, cfg);
    const double pde = u.curve.value_at(kZ0);
    const double se_1d = std::hypot(two.std_error, one.std_error);
    const double se_scale = std::hypot(two.std_error, scaled.std_error);
    const double tol_1d = 3.0 * se_1d + kEulerAllowance;
    const double tol_pde = 3.0 * two.std_error + kEulerAllowance;
    const double g1 = std::abs(two.estimate - one.estimate);
    const double gp = std::abs(two.estimate - pde);
    const double gs = std::abs(two.estimate - scaled.estimate);
    return {g1 <= tol_1d && gp <= tol_pde && gs <= 3.0 * se_scale,
            "2-D vs 1-D " + fmt(g1) + " <= " + fmt(tol_1d) + ", vs phi(10) " + fmt(gp) + " <= " + fmt(tol_pde) +
                ", scaled " + fmt(gs) + " <= " + fmt(3.0 * se_scale)};
}

Line explicit_y() {
    SimConfig cfg;
    cfg.n_paths = 400;
    cfg.dt = 1.0 / 50.0;
    cfg.t_cap = 10.0;
    const PiecewiseControl control{1.0, {0.0, 0.05, 0.1, 0.02}};
    const ExplicitYReport rep = explicit_y_check(reference(), control, 0.03, cfg, 3);
    const double lo = std::sqrt(2.0) / kSqrt2Slack, hi = std::sqrt(2.0) * kSqrt2Slack;
    bool ratios_ok = true;
    std::string ratios;
    for (std::size_t l = 1; l < rep.mean_gap.size(); ++l) {
        const double q = rep.mean_gap[l - 1] / rep.mean_gap[l];
        ratios_ok = ratios_ok && q >= lo && q <= hi;
        ratios += (l > 1 ? ", " : "") + fmt(q);
    }
    SimConfig zero_cfg = cfg;
    zero_cfg.n_paths = 50;
    const ExplicitYReport zero = explicit_y_check(reference(), PiecewiseControl{1.0, {0.0}}, 0.0, zero_cfg, 2);
    const bool exact = std::all_of(zero.max_gap.begin(), zero.max_gap.end(), [](double g) { return g == 0.0; });
    return {ratios_ok && exact, "gap ratios per dt halving " + ratios + " in [" + fmt(lo) + ", " + fmt(hi) +
                                    "]; y0=0, alpha=0 gap " + (exact ? "exactly 0" : "nonzero")};
}

Line determinism() {
    const fs::path base = fs::current_path() / "acceptance_determinism";
    cli::RunConfig cfg;
    cfg.sim.n_paths = kDeterminismPaths;
    std::string reports[2];
    int status[2];
    for (int k = 0; k < 2; ++k) {
        const fs::path dir = base / std::to_string(k);
        fs::remove_all(dir);
        cfg.outdir = dir.string();
        std::ostringstream out, err;
        status[k] = cli::run_command("verify", cfg, {}, out, err);
        std::ifstream in(dir / "verification.json", std::ios::binary);
        std::ostringstream text;
        text << in.rdbuf();
        reports[k] = text.str();
    }
    const bool same = !reports[0].empty() && reports[0] == reports[1];
    return {same && status[0] == status[1],
            "two verify runs (seed " + std::to_string(cfg.sim.seed) + ", " + std::to_string(kDeterminismPaths) +
                " paths): " + std::to_string(reports[0].size()) + " bytes, " +
                (same ? "byte-identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> expected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--expect-fail" && i + 1 < argc) {
            std::stringstream list(argv[++i]);
            for (std::string item; std::getline(list, item, ',');) expected.insert(std::stoi(item));
        } else {
            std::cerr << "usage: acceptance [--expect-fail N[,N...]]\n";
            return 2;
        }
    }

    const std::pair<const char*, std::function<Line()>> criteria[] = {
        {"boundary values and shape", shape},
        {"HJB residual convergence", residual},
        {"duality identity", duality},
        {"free-boundary cross-check", boundary},
        {"smooth pasting", pasting},
        {"control bound", control_bound},
        {"convexity lower bound", convexity},
        {"Monte Carlo vs PDE, primal", mc_primal},
        {"Monte Carlo vs PDE, game", mc_game},
        {"saddle inequalities", saddle},
        {"uniform convergence ladder", ladder},
        {"2-D lift consistency", lift},
        {"explicit solution check", explicit_y},
        {"determinism", determinism},
    };

    std::set<int> failed;
    int number = 0;
    for (const auto& [name, run] : criteria) {
        ++number;
        Line line;
        try {
            line = run();
        } catch (const std::exception& e) {
            line = {false, std::string("error: ") + e.what()};
        }
        if (!line.pass) failed.insert(number);
        std::cout << "criterion " << number << ' ' << (line.pass ? "PASS" : "FAIL") << "  " << name << ": "
                  << line.detail << std::endl;
    }

    std::cout << (14 - failed.size()) << " of 14 criteria passed";
    if (!expected.empty()) std::cout << (failed == expected ? "; failures match the expected set" : "; unexpected result");
    std::cout << '\n';
    return failed == expected ? 0 : 1;
}
