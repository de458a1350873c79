#include "ruin_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ruin/duality.hpp"
#include "ruin/fbp_dual.hpp"
#include "ruin/io.hpp"
#include "ruin/mc_sim.hpp"
#include "ruin/pde_primal.hpp"
#include "ruin_cli/verify.hpp"

namespace ruin::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

fs::path prepare_outdir(const RunConfig& cfg) {
    fs::path dir(cfg.outdir);
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    return f;
}

void write_json(const fs::path& path, const json& doc, std::ostream& out) {
    auto f = open_out(path);
    f << doc.dump(2) << '\n';
    out << "wrote " << path.string() << '\n';
}

template <class Writer>
void write_text(const fs::path& path, Writer&& writer, std::ostream& out) {
    auto f = open_out(path);
    writer(f);
    out << "wrote " << path.string() << '\n';
}

json header(const RunConfig& cfg, const char* command) {
    return json{{"command", command}, {"config_hash", cfg.hash()}};
}

json params_json(const RunConfig& cfg) {
    const MarketParams& p = cfg.params;
    return json{{"r", p.r},           {"mu", p.mu}, {"sigma", p.sigma}, {"a", p.a},
                {"b", p.b},           {"rho", p.rho}, {"lambda", p.lambda}, {"M", cfg.M},
                {"grid_n", cfg.grid_n}, {"tol", cfg.tol}};
}

json sim_config_json(const SimConfig& s) {
    return json{{"n_paths", s.n_paths}, {"dt", s.dt}, {"seed", s.seed}, {"t_cap", s.t_cap}, {"antithetic", s.antithetic}};
}

json convexity_json(const ConvexityReport& c) {
    json j{{"all_pass", c.all_pass},
           {"n_checked", c.n_checked},
           {"n_failed", c.n_failed},
           {"min_slack", c.min_slack},
           {"min_relative_slack", c.min_relative_slack},
           {"worst_z", c.worst_z}};
    j["first_failure_z"] = c.first_failure_z >= 0.0 ? json(c.first_failure_z) : json(nullptr);
    return j;
}

json sim_json(const SimResult& r, double target) {
    const double tol = r.tolerance(kEulerAllowance);
    return json{{"estimate", r.estimate},
                {"std_error", r.std_error},
                {"n_paths", r.n_paths},
                {"n_absorbed_low", r.n_absorbed_low},
                {"n_absorbed_high", r.n_absorbed_high},
                {"n_capped", r.n_capped},
                {"n_stopped", r.n_stopped},
                {"n_out_of_domain", r.n_out_of_domain},
                {"bias_bound", r.bias_bound},
                {"target", target},
                {"gap", r.estimate - target},
                {"tolerance", tol},
                {"within_tolerance", std::abs(r.estimate - target) <= tol}};
}

json duality_json(const DualityReport& rep) {
    json checks = json::array();
    for (const SlopeCheck& s : rep.slope_checks)
        checks.push_back({{"z", s.z},
                          {"primal_d2", s.primal_d2},
                          {"dual_d2_inverse", s.dual_d2_inverse},
                          {"relative_error", s.relative_error},
                          {"primal_d1", s.primal_d1},
                          {"minus_I", s.minus_I},
                          {"slope_error", s.slope_error},
                          {"passed", s.passed}});
    return json{{"sup_gap", rep.sup_gap},
                {"boundary_gap_yM", rep.boundary_gap_yM},
                {"boundary_gap_y0", rep.boundary_gap_y0},
                {"biconjugate_gap", rep.biconjugate_gap},
                {"h_primal", rep.h_primal},
                {"h_dual", rep.h_dual},
                {"slope_curvature_rel_tol", kSlopeCurvatureRelTol},
                {"slope_abs_tol", kSlopeAbsTol},
                {"slope_checks", checks}};
}

json deviation_json(const DeviationResult& d, double target) {
    json j{{"name", d.name}, {"player", d.player}};
    j["sim"] = sim_json(d.sim, target);
    j["tolerance"] = d.tolerance;
    j["passed"] = d.passed;
    return j;
}

json saddle_json(const SaddleReport& rep) {
    json devs = json::array();
    for (const auto& d : rep.deviations) devs.push_back(deviation_json(d, rep.target));
    return json{{"y0", rep.y0},
                {"target", rep.target},
                {"immediate_stop", {{"value", rep.immediate_stop}, {"passed", rep.immediate_stop_passed}}},
                {"equilibrium", deviation_json(rep.equilibrium, rep.target)},
                {"deviations", devs},
                {"all_passed", rep.all_passed()}};
}

json check_json(const Check& c) {
    json j{{"name", c.name}, {"measured", c.measured}, {"relation", c.relation}};
    if (c.relation == "in")
        j["tolerance"] = json::array({c.lower, c.upper});
    else
        j["tolerance"] = c.relation == ">=" || c.relation == ">" ? c.lower : c.upper;
    j["passed"] = c.passed;
    return j;
}

PrimalOutcome primal_outcome(const RunConfig& cfg, const Model& model) {
    PrimalOutcome p;
    p.curve = solve_primal(model, cfg.M, cfg.grid_n, cfg.tol, &p.log);
    p.policy = feedback_policy(p.curve, model);
    return p;
}

}  // namespace

int cmd_solve_primal(const RunConfig& cfg, std::ostream& out) {
    const Model model(cfg.params);
    const auto dir = prepare_outdir(cfg);
    const PrimalOutcome p = primal_outcome(cfg, model);
    const ResidualProfile residual = hjb_residual(p.curve, model);

    write_text(dir / "primal.csv", [&](std::ostream& f) { write_primal_csv(f, p.curve, p.policy); }, out);
    write_text(dir / "residual.csv", [&](std::ostream& f) { write_residual_csv(f, residual); }, out);

    json doc = header(cfg, "solve-primal");
    doc["params"] = params_json(cfg);
    doc["h"] = p.curve.grid.h();
    doc["iterations"] = p.log.iterations;
    doc["residual_sup"] = residual.sup();
    doc["convexity"] = convexity_json(convexity_report(p.curve, model));
    write_json(dir / "convexity.json", doc, out);
    return kExitOk;
}

int cmd_solve_dual(const RunConfig& cfg, std::ostream& out) {
    const Model model(cfg.params);
    const double threshold = 1.0 / cfg.params.lambda;
    if (!(cfg.M > threshold)) {
        throw std::invalid_argument("refusing M = " + format_double(cfg.M) + ": the game needs M > 1/lambda = " +
                                    format_double(threshold) + ", otherwise the continuation region can be empty");
    }
    const auto dir = prepare_outdir(cfg);
    DualOptions opts;
    opts.grid_n = cfg.grid_n;
    const DualSolution sol = solve_dual(model, cfg.M, cfg.tol, opts);
    const AlphaCurve alpha = alpha_star(sol, model);

    write_text(dir / "dual.csv", [&](std::ostream& f) { write_dual_csv(f, sol, alpha); }, out);

    json doc = header(cfg, "solve-dual");
    doc["y_M"] = sol.boundary.y_M;
    doc["y_0"] = sol.boundary.y_0;
    doc["pasting_residuals"] = json::array({sol.pasting_residuals.first, sol.pasting_residuals.second});
    doc["value_residual"] = sol.value_residual;
    doc["M"] = sol.M;
    doc["h"] = sol.curve.grid.h();
    write_json(dir / "boundary.json", doc, out);
    return kExitOk;
}

int cmd_legendre(const RunConfig& cfg, std::ostream& out) {
    const Model model(cfg.params);
    const auto dir = prepare_outdir(cfg);
    DualOptions opts;
    opts.grid_n = cfg.grid_n;
    const DualSolution sol = solve_dual(model, cfg.M, cfg.tol, opts);
    const ValueCurve transform = legendre_concave(sol, cfg.grid_n);
    const PrimalOutcome p = primal_outcome(cfg, model);
    const DualityReport rep = biconjugate_check(sol, p.curve);

    write_text(dir / "legendre.csv", [&](std::ostream& f) { write_transform_csv(f, transform); }, out);
    json doc = header(cfg, "legendre");
    doc.update(duality_json(rep));
    write_json(dir / "duality.json", doc, out);
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
    const Model model(cfg.params);
    const auto dir = prepare_outdir(cfg);
    SimConfig sim = cfg.sim;
    sim.record_paths = opts.record_paths;

    const PrimalOutcome p = primal_outcome(cfg, model);
    const SimResult ruin = simulate_ruin(model, cfg.M, p.policy, cfg.z0, sim);

    DualOptions dual_opts;
    dual_opts.grid_n = cfg.grid_n;
    const DualSolution sol = solve_dual(model, cfg.M, cfg.tol, dual_opts);
    const double y0 = 0.5 * (sol.boundary.y_M + sol.boundary.y_0);
    const SimResult game = simulate_game(model, cfg.M, sol, y0, sim);

    if (opts.record_paths) {
        write_text(dir / "ruin_paths.csv", [&](std::ostream& f) { write_paths_csv(f, ruin); }, out);
        write_text(dir / "game_paths.csv", [&](std::ostream& f) { write_paths_csv(f, game); }, out);
    }
    json doc = header(cfg, "simulate");
    doc["sim_config"] = sim_config_json(sim);
    doc["ruin"] = sim_json(ruin, p.curve.value_at(cfg.z0));
    doc["ruin"]["z0"] = cfg.z0;
    doc["game"] = sim_json(game, sol.curve.value_at(y0));
    doc["game"]["y0"] = y0;
    write_json(dir / "simulate.json", doc, out);
    return kExitOk;
}

int cmd_saddle(const RunConfig& cfg, std::ostream& out) {
    const Model model(cfg.params);
    const auto dir = prepare_outdir(cfg);
    DualOptions dual_opts;
    dual_opts.grid_n = cfg.grid_n;
    const DualSolution sol = solve_dual(model, cfg.M, cfg.tol, dual_opts);
    const double y0 = 0.5 * (sol.boundary.y_M + sol.boundary.y_0);
    const SaddleReport rep = saddle_test(model, cfg.M, sol, y0, cfg.sim);

    json doc = header(cfg, "saddle");
    doc["sim_config"] = sim_config_json(cfg.sim);
    doc.update(saddle_json(rep));
    write_json(dir / "saddle.json", doc, out);
    return rep.all_passed() ? kExitOk : kExitChecksFailed;
}

int cmd_verify(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
    const Model model(cfg.params);
    const auto dir = prepare_outdir(cfg);

    std::optional<PrimalOutcome> supplied;
    if (opts.primal_input) {
        std::ifstream in(*opts.primal_input, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open primal input '" + *opts.primal_input + "'");
        PrimalTable table = read_primal_csv(in, *opts.primal_input);
        supplied.emplace();
        supplied->curve = std::move(table.curve);
        supplied->policy = std::move(table.policy);
    }
    const VerificationReport rep = run_verification(cfg, supplied ? &*supplied : nullptr);

    json doc = header(cfg, "verify");
    doc["params"] = params_json(cfg);
    doc["sim_config"] = sim_config_json(cfg.sim);
    doc["primal_source"] = opts.primal_input ? "file" : "solved";
    doc["h_primal"] = rep.h_primal;
    doc["h_dual"] = rep.h_dual;
    doc["h_scale"] = rep.h_scale;
    json checks = json::array();
    for (const Check& c : rep.checks) checks.push_back(check_json(c));
    doc["checks"] = checks;
    json diagnostics = json::array();
    for (const Diagnostic& d : rep.diagnostics)
        diagnostics.push_back({{"name", d.name}, {"value", d.value}, {"note", d.note}});
    doc["diagnostics"] = diagnostics;
    doc["duality"] = duality_json(rep.duality);
    doc["saddle"] = saddle_json(rep.saddle);
    doc["all_passed"] = rep.all_passed();
    write_json(dir / "verification.json", doc, out);

    for (const Check& c : rep.checks)
        if (!c.passed) out << "FAILED " << c.name << ": measured " << format_double(c.measured) << '\n';
    out << (rep.all_passed() ? "all checks passed\n" : "some checks failed\n");
    return rep.all_passed() ? kExitOk : kExitChecksFailed;
}

int cmd_sweep(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
    const Model model(cfg.params);
    const auto dir = prepare_outdir(cfg);
    UnboundedOptions ladder_opts;
    ladder_opts.M_start = cfg.M;
    ladder_opts.h = cfg.M / static_cast<double>(cfg.grid_n - 1);
    ladder_opts.solve_tol = cfg.tol;
    const auto rungs = convergence_ladder(model, opts.rungs, ladder_opts);

    bool decreasing = true;
    for (std::size_t k = 1; k < rungs.size(); ++k) decreasing = decreasing && rungs[k].sup_gap < rungs[k - 1].sup_gap;

    write_text(dir / "sweep.csv",
               [&](std::ostream& f) {
                   f << "M,n,sup_gap\n";
                   for (const auto& r : rungs) f << format_double(r.M) << ',' << r.n << ',' << format_double(r.sup_gap) << '\n';
               },
               out);
    json doc = header(cfg, "sweep");
    doc["h"] = ladder_opts.h;
    json list = json::array();
    for (const auto& r : rungs) list.push_back({{"M", r.M}, {"n", r.n}, {"sup_gap", r.sup_gap}});
    doc["rungs"] = list;
    doc["strictly_decreasing"] = decreasing;
    write_json(dir / "sweep.json", doc, out);
    return kExitOk;
}

int run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opts, std::ostream& out,
                std::ostream& err) {
    const auto problems = cfg.problems();
    if (!problems.empty()) {
        err << name << ": invalid config:";
        for (const auto& p : problems) err << ' ' << p << ';';
        err << '\n';
        return kExitError;
    }
    try {
        if (name == "solve-primal") return cmd_solve_primal(cfg, out);
        if (name == "solve-dual") return cmd_solve_dual(cfg, out);
        if (name == "legendre") return cmd_legendre(cfg, out);
        if (name == "simulate") return cmd_simulate(cfg, opts, out);
        if (name == "saddle") return cmd_saddle(cfg, out);
        if (name == "verify") return cmd_verify(cfg, opts, out);
        if (name == "sweep") return cmd_sweep(cfg, opts, out);
        err << "unknown command '" << name << "'\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << name << ": " << e.what() << '\n';
        return kExitError;
    }
}

}  // namespace ruin::cli
