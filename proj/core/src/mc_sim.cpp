#include "ruin/mc_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/random/normal_distribution.hpp>

#include "ruin/pde_primal.hpp"

namespace ruin {

namespace {

// SplitMix64: a counter-based generator, state_k = state_0 + k * gamma pushed
// through a bijective mixer. Each path gets state_0 = mix(seed, path index),
// so streams are fixed by (seed, index) alone.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    result_type operator()() { return mix(state_ += kGamma); }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;
    std::uint64_t state_;
};

class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream, bool negate)
        : engine_(SplitMix64::mix(seed ^ SplitMix64::mix(stream + 0x632be59bd9b4e019ull))), negate_(negate) {}

    double operator()() {
        const double x = normal_(engine_);
        return negate_ ? -x : x;
    }

private:
    SplitMix64 engine_;
    boost::random::normal_distribution<double> normal_;
    bool negate_;
};

struct PathResult {
    PathOutcome outcome = PathOutcome::capped;
    double tau = 0.0;
    double payoff = 0.0;
    bool out_of_domain = false;
};

// Runs `path(stream, index)` for every path index across worker threads and
// reduces in index order.
template <class PathFn>
SimResult run_paths(const SimConfig& cfg, double lambda, PathFn&& path) {
    cfg.validate();
    const std::size_t n = cfg.n_paths;
    std::vector<PathResult> results(n);

    unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::uint64_t stream = cfg.antithetic ? i / 2 : i;
            NormalStream normals(cfg.seed, stream, cfg.antithetic && (i % 2 == 1));
            results[i] = path(normals, i);
        }
    };
    if (workers <= 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    SimResult out;
    out.n_paths = n;
    out.bias_bound = std::exp(-lambda * cfg.t_cap);
    double sum = 0.0;
    for (const auto& r : results) {
        sum += r.payoff;
        switch (r.outcome) {
            case PathOutcome::absorbed_low: ++out.n_absorbed_low; break;
            case PathOutcome::absorbed_high: ++out.n_absorbed_high; break;
            case PathOutcome::capped: ++out.n_capped; break;
            case PathOutcome::stopped: ++out.n_stopped; break;
        }
        if (r.out_of_domain) ++out.n_out_of_domain;
    }
    out.estimate = sum / static_cast<double>(n);

    // Antithetic pairs are one sample each.
    const std::size_t stride = cfg.antithetic ? 2 : 1;
    const std::size_t samples = n / stride;
    if (samples > 1) {
        const double mean = out.estimate;
        double ss = 0.0;
        for (std::size_t k = 0; k < samples; ++k) {
            double v = 0.0;
            for (std::size_t j = 0; j < stride; ++j) v += results[k * stride + j].payoff;
            v /= static_cast<double>(stride);
            ss += (v - mean) * (v - mean);
        }
        out.std_error = std::sqrt(ss / static_cast<double>(samples - 1)) / std::sqrt(static_cast<double>(samples));
    }

    if (cfg.record_paths) {
        out.paths.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            out.paths.push_back({i, results[i].outcome, results[i].tau, results[i].payoff});
    }
    return out;
}

// Linear interpolation on a uniform grid without bounds checks; callers keep
// x inside [lower, upper].
struct UniformTable {
    double lower, inv_h;
    std::size_t last_cell;
    const double* ys;

    double operator()(double x) const {
        const double s = (x - lower) * inv_h;
        std::size_t i = s > 0.0 ? static_cast<std::size_t>(s) : 0;
        if (i > last_cell) i = last_cell;
        const double t = s - static_cast<double>(i);
        return ys[i] + t * (ys[i + 1] - ys[i]);
    }
};

UniformTable table_for(const Grid& grid, const std::vector<double>& ys) {
    return UniformTable{grid.lower, 1.0 / grid.h(), grid.n - 2, ys.data()};
}

}  // namespace

void SimConfig::validate() const {
    if (n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(t_cap > 0.0)) throw std::invalid_argument("t_cap must be positive");
    if (antithetic && n_paths % 2 != 0) throw std::invalid_argument("antithetic pairing needs an even n_paths");
}

std::string_view to_string(PathOutcome outcome) {
    switch (outcome) {
        case PathOutcome::absorbed_low: return "absorbed_low";
        case PathOutcome::absorbed_high: return "absorbed_high";
        case PathOutcome::capped: return "capped";
        case PathOutcome::stopped: return "stopped";
    }
    return "unknown";
}

double SimResult::tolerance(double allowance) const {
    const double capped_share = n_paths ? static_cast<double>(n_capped) / static_cast<double>(n_paths) : 0.0;
    return 3.0 * std_error + allowance + capped_share * bias_bound;
}

SimResult simulate_ruin(const Model& model, std::optional<double> M, const PolicyCurve& policy, double z0,
                        const SimConfig& cfg) {
    const double upper = M.value_or(policy.grid.upper);
    if (!(upper > 0.0)) throw std::invalid_argument("barrier M must be positive");
    if (policy.grid.lower > 0.0 || policy.grid.upper < upper * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "policy grid [" << policy.grid.lower << ", " << policy.grid.upper << "] does not cover [0, " << upper
            << "]";
        throw std::out_of_range(msg.str());
    }

    const auto& d = model.derived();
    const double lambda = model.market().lambda;
    const double sigma = model.market().sigma;
    const double nu = model.nu();
    const double vol2 = std::sqrt(model.nu2() + sigma * sigma);  // volatility of the second asset
    const double rt = d.rho_tilde;
    const double rt_perp = std::sqrt(1.0 - rt * rt);
    const double dt = cfg.dt;
    const double sdt = std::sqrt(dt);
    const UniformTable pi_at = table_for(policy.grid, policy.pi);
    const bool bounded = M.has_value();

    return run_paths(cfg, lambda, [&](NormalStream& normal, std::size_t) {
        PathResult r;
        if (z0 <= 0.0) {
            r.outcome = PathOutcome::absorbed_low;
            r.payoff = 1.0;
            return r;
        }
        if (z0 >= upper) {
            r.outcome = PathOutcome::absorbed_high;
            r.out_of_domain = !bounded;
            if (!bounded) r.outcome = PathOutcome::capped;
            return r;
        }
        double z = z0;
        double t = 0.0;
        for (;;) {
            const double pi = pi_at(z);
            const double xi1 = normal();
            const double xi2 = normal();
            const double dB1 = sdt * xi1;
            const double dB2 = sdt * (rt * xi1 + rt_perp * xi2);
            z += ((d.r_tilde * z - 1.0) + d.excess * pi) * dt + (z - pi) * nu * dB1 + pi * vol2 * dB2;
            t += dt;
            if (z <= 0.0) {
                r.outcome = PathOutcome::absorbed_low;
                r.tau = t;
                r.payoff = std::exp(-lambda * t);
                return r;
            }
            if (z >= upper) {
                r.tau = t;
                if (bounded) {
                    r.outcome = PathOutcome::absorbed_high;
                } else {
                    r.outcome = PathOutcome::capped;
                    r.out_of_domain = true;
                }
                return r;
            }
            if (t >= cfg.t_cap) {
                r.outcome = PathOutcome::capped;
                r.tau = t;
                return r;
            }
        }
    });
}

SimResult simulate_ruin_2d(const Model& model, const ValueCurve& curve, double w0, double c0, const SimConfig& cfg) {
    if (!(c0 > 0.0)) throw std::invalid_argument("initial consumption rate must be positive");
    if (!(w0 >= 0.0)) throw std::invalid_argument("initial wealth must be nonnegative");
    const auto& p = model.market();
    const double lambda = p.lambda;
    const double upper = curve.grid.upper;
    const double rho_perp = std::sqrt(1.0 - p.rho * p.rho);
    const double dt = cfg.dt;
    const double sdt = std::sqrt(dt);
    const double c_drift = (p.a - 0.5 * p.b * p.b) * dt;
    const double hedge = p.rho * p.b / p.sigma;

    // pi~ from interpolated f', f'' exactly as lift_2d evaluates it.
    const double excess = model.derived().excess;
    const double sigma2 = p.sigma * p.sigma;
    const UniformTable d1_at = table_for(curve.grid, curve.d1);
    const UniformTable d2_at = table_for(curve.grid, curve.d2);
    auto pi_star = [&](double z, double c) {
        const double pi_tilde = excess == 0.0 ? 0.0 : -excess * d1_at(z) / (sigma2 * d2_at(z));
        return c * (pi_tilde + hedge * z);
    };

    return run_paths(cfg, lambda, [&](NormalStream& normal, std::size_t) {
        PathResult r;
        double w = w0;
        double c = c0;
        if (w <= 0.0) {
            r.outcome = PathOutcome::absorbed_low;
            r.payoff = 1.0;
            return r;
        }
        double t = 0.0;
        for (;;) {
            const double z = w / c;
            if (z > upper) {
                r.outcome = PathOutcome::capped;
                r.out_of_domain = true;
                r.tau = t;
                return r;
            }
            const double pi = pi_star(z, c);
            const double xi1 = normal();
            const double xi2 = normal();
            const double dBS = sdt * xi1;
            const double dBc = sdt * (p.rho * xi1 + rho_perp * xi2);
            w += (p.r * w + (p.mu - p.r) * pi - c) * dt + p.sigma * pi * dBS;
            c *= std::exp(c_drift + p.b * dBc);
            t += dt;
            if (w <= 0.0) {
                r.outcome = PathOutcome::absorbed_low;
                r.tau = t;
                r.payoff = std::exp(-lambda * t);
                return r;
            }
            if (t >= cfg.t_cap) {
                r.outcome = PathOutcome::capped;
                r.tau = t;
                return r;
            }
        }
    });
}

SimResult simulate_game(const Model& model, double M, const DualSolution& sol, double y0, const SimConfig& cfg) {
    StopRule stop{sol.boundary.y_M, sol.boundary.y_0, std::nullopt, true};
    return simulate_game_with(model, M, sol, y0, ControlRule{}, stop, cfg);
}

SimResult simulate_game_with(const Model& model, double M, const DualSolution& sol, double y0, const ControlRule& control,
                             const StopRule& stop, const SimConfig& cfg) {
    const double y_M = sol.boundary.y_M;
    const double y_0 = sol.boundary.y_0;
    if (!(y0 >= y_M && y0 <= y_0)) {
        std::ostringstream msg;
        msg << "start y0 = " << y0 << " outside the continuation region [" << y_M << ", " << y_0 << "]";
        throw std::invalid_argument(msg.str());
    }
    if (!stop.use_region && !stop.at_time) throw std::invalid_argument("stop rule never stops before the cap");

    const auto& d = model.derived();
    const double lambda = model.market().lambda;
    const double nu = model.nu();
    const double sharpe = model.sharpe();
    const double growth = lambda - d.r_tilde;
    const double clip_slope = std::sqrt(2.0 * d.m);
    const double dt = cfg.dt;
    const double sdt = std::sqrt(dt);
    const double t_stop = stop.at_time.value_or(cfg.t_cap);
    const double step_discount = std::exp(-lambda * dt);

    // Optimal control tabulated on the dual grid and extended off D: linear to
    // 0 at y = 0 below y_M, zero above y_0.
    const AlphaCurve alpha = alpha_star(sol, model);
    const double alpha_yM = alpha.ratio.front();
    const Grid& grid = sol.curve.grid;
    std::vector<double> alpha_nodes(grid.n, 0.0);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double y = grid.at(i);
        if (y <= y_M)
            alpha_nodes[i] = alpha_yM * y / y_M;
        else if (y < y_0)
            alpha_nodes[i] = alpha.at(y);
    }
    const UniformTable alpha_table = table_for(grid, alpha_nodes);
    auto optimal = [&](double y) { return y >= grid.upper ? 0.0 : alpha_table(y); };
    auto control_at = [&](double y) {
        double a = 0.0;
        switch (control.kind) {
            case ControlRule::Kind::optimal: a = optimal(y); break;
            case ControlRule::Kind::zero: a = 0.0; break;
            case ControlRule::Kind::scaled: a = control.scale * optimal(y); break;
        }
        if (control.clip) a = std::min(a, clip_slope * y);
        return a;
    };
    auto stopped = [&](double y) { return stop.use_region && (y <= stop.lower || y >= stop.upper); };

    return run_paths(cfg, lambda, [&](NormalStream& normal, std::size_t) {
        PathResult r;
        double y = y0;
        double t = 0.0;
        double reward = 0.0;
        double discount = 1.0;
        auto finish = [&](PathOutcome outcome) {
            r.outcome = outcome;
            r.tau = t;
            r.payoff = reward + discount * payoff_u(M, std::max(y, 0.0));
            return r;
        };
        if (stopped(y)) return finish(y <= stop.lower ? PathOutcome::absorbed_low : PathOutcome::absorbed_high);
        if (t_stop <= 0.0) return finish(PathOutcome::stopped);
        for (;;) {
            const double a = control_at(y);
            const double xi1 = normal();
            const double xi2 = normal();
            reward += discount * y * dt;
            y += y * (growth * dt + sharpe * sdt * xi1) + a * (nu * dt + sdt * xi2);
            y = std::max(y, 0.0);
            t += dt;
            discount *= step_discount;
            if (stopped(y)) return finish(y <= stop.lower ? PathOutcome::absorbed_low : PathOutcome::absorbed_high);
            if (t >= t_stop - 0.5 * dt) {
                // A requested stopping time is a stop, not a truncation.
                return finish(stop.at_time ? PathOutcome::stopped : PathOutcome::capped);
            }
        }
    });
}

bool SaddleReport::all_passed() const {
    if (!immediate_stop_passed || !equilibrium.passed) return false;
    return std::all_of(deviations.begin(), deviations.end(), [](const auto& d) { return d.passed; });
}

SaddleReport saddle_test(const Model& model, double M, const DualSolution& sol, double y0, const SimConfig& cfg) {
    const double y_M = sol.boundary.y_M;
    const double y_0 = sol.boundary.y_0;
    if (!(y0 > y_M && y0 < y_0)) throw std::invalid_argument("saddle test needs y0 strictly inside D");

    SaddleReport report;
    report.y0 = y0;
    report.target = sol.curve.value_at(y0);
    report.immediate_stop = payoff_u(M, y0);
    report.immediate_stop_passed = report.immediate_stop >= report.target;

    const StopRule optimal_stop{y_M, y_0, std::nullopt, true};
    const ControlRule optimal_control{};

    {
        auto& eq = report.equilibrium;
        eq.name = "alpha*, tau*";
        eq.player = "both";
        eq.sim = simulate_game_with(model, M, sol, y0, optimal_control, optimal_stop, cfg);
        eq.tolerance = eq.sim.tolerance(kEulerAllowance);
        eq.passed = std::abs(eq.sim.estimate - report.target) <= eq.tolerance;
    }

    // Stopper deviates: the controller can only gain, E >= value.
    const double shrink = 0.1 * (y_0 - y_M);
    const std::vector<std::pair<std::string, StopRule>> stoppers = {
        {"stop at T = 1", StopRule{0.0, 0.0, 1.0, false}},
        {"stop on exit of shrunken region", StopRule{y_M + shrink, y_0 - shrink, std::nullopt, true}},
        {"never stop", StopRule{0.0, 0.0, cfg.t_cap, false}},
    };
    for (const auto& [name, rule] : stoppers) {
        DeviationResult dev;
        dev.name = name;
        dev.player = "stopper";
        dev.sim = simulate_game_with(model, M, sol, y0, optimal_control, rule, cfg);
        dev.tolerance = dev.sim.tolerance(kEulerAllowance);
        dev.passed = dev.sim.estimate >= report.target - dev.tolerance;
        report.deviations.push_back(std::move(dev));
    }

    // Controller deviates: the stopper can only gain, E <= value.
    const std::vector<std::pair<std::string, ControlRule>> controllers = {
        {"alpha = 0", ControlRule{ControlRule::Kind::zero, 0.0, false}},
        {"alpha = alpha*/2", ControlRule{ControlRule::Kind::scaled, 0.5, false}},
        {"alpha = 2 alpha* clipped", ControlRule{ControlRule::Kind::scaled, 2.0, true}},
    };
    for (const auto& [name, rule] : controllers) {
        DeviationResult dev;
        dev.name = name;
        dev.player = "controller";
        dev.sim = simulate_game_with(model, M, sol, y0, rule, optimal_stop, cfg);
        dev.tolerance = dev.sim.tolerance(kEulerAllowance);
        dev.passed = dev.sim.estimate <= report.target + dev.tolerance;
        report.deviations.push_back(std::move(dev));
    }
    return report;
}

double PiecewiseControl::at(double t) const {
    if (values.empty()) return 0.0;
    const double s = t / step;
    std::size_t k = s > 0.0 ? static_cast<std::size_t>(s) : 0;
    return values[std::min(k, values.size() - 1)];
}

ExplicitYPaths explicit_y_paths(const Model& model, const PiecewiseControl& control, double y0, double dt,
                                const std::vector<double>& dB1, const std::vector<double>& dB2) {
    const auto& d = model.derived();
    const double lambda = model.market().lambda;
    const double nu = model.nu();
    const double sharpe = model.sharpe();
    const double growth = lambda - d.r_tilde;
    const double log_drift = growth - d.m;  // lambda - r~ - 1/2 sharpe^2

    const std::size_t steps = dB1.size();
    ExplicitYPaths out;
    out.euler.resize(steps + 1);
    out.closed.resize(steps + 1);
    out.euler[0] = out.closed[0] = y0;

    double y = y0;
    double B1 = 0.0;
    double H = 1.0;
    double integral = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double a = control.at(t);
        y += y * (growth * dt + sharpe * dB1[k]) + a * (nu * dt + dB2[k]);
        integral += a / H * (nu * dt + dB2[k]);
        B1 += dB1[k];
        H = std::exp(log_drift * static_cast<double>(k + 1) * dt + sharpe * B1);
        out.euler[k + 1] = y;
        out.closed[k + 1] = H * (y0 + integral);
    }
    return out;
}

ExplicitYReport explicit_y_check(const Model& model, const PiecewiseControl& control, double y0, const SimConfig& cfg,
                                 std::size_t levels) {
    cfg.validate();
    if (levels < 1) throw std::invalid_argument("need at least one level");
    if (!(y0 >= 0.0)) throw std::invalid_argument("y0 must be nonnegative");

    const std::size_t coarse_steps = static_cast<std::size_t>(std::llround(cfg.t_cap / cfg.dt));
    if (coarse_steps < 1) throw std::invalid_argument("horizon shorter than one step");
    const std::size_t refine = std::size_t{1} << (levels - 1);
    const std::size_t fine_steps = coarse_steps * refine;
    const double fine_dt = cfg.dt / static_cast<double>(refine);
    const double fine_sdt = std::sqrt(fine_dt);

    ExplicitYReport report;
    for (std::size_t l = 0; l < levels; ++l) report.dt.push_back(cfg.dt / static_cast<double>(std::size_t{1} << l));
    report.max_gap.assign(levels, 0.0);
    report.mean_gap.assign(levels, 0.0);

    std::vector<double> fine1(fine_steps), fine2(fine_steps), dB1, dB2;
    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
        NormalStream normal(cfg.seed, i, false);
        for (std::size_t k = 0; k < fine_steps; ++k) {
            fine1[k] = fine_sdt * normal();
            fine2[k] = fine_sdt * normal();
        }
        for (std::size_t l = 0; l < levels; ++l) {
            const std::size_t group = refine >> l;  // fine steps per step at this level
            const std::size_t steps = fine_steps / group;
            dB1.assign(steps, 0.0);
            dB2.assign(steps, 0.0);
            for (std::size_t k = 0; k < fine_steps; ++k) {
                dB1[k / group] += fine1[k];
                dB2[k / group] += fine2[k];
            }
            const auto paths = explicit_y_paths(model, control, y0, report.dt[l], dB1, dB2);
            double path_max = 0.0;
            for (std::size_t k = 0; k < paths.euler.size(); ++k)
                path_max = std::max(path_max, std::abs(paths.euler[k] - paths.closed[k]));
            report.max_gap[l] = std::max(report.max_gap[l], path_max);
            report.mean_gap[l] += path_max / static_cast<double>(cfg.n_paths);
        }
    }
    return report;
}

}  // namespace ruin
