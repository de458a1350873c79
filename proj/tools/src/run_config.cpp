#include "ruin_cli/run_config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ruin/io.hpp"

namespace ruin::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <class Int>
std::optional<Int> parse_int(std::string_view text) {
    text = trim(text);
    Int x{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
    return x;
}

std::optional<bool> parse_bool(std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    return std::nullopt;
}

// Applies one setting given as text; `line` is only used for diagnostics.
void apply(RunConfig& cfg, std::string_view key, std::string_view value, const std::string& source, std::size_t line) {
    auto real = [&](double& slot) {
        const auto x = parse_double(value);
        if (!x) throw ParseError(source, line, "'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
        slot = *x;
    };
    auto count = [&](std::size_t& slot) {
        const auto x = parse_int<std::size_t>(value);
        if (!x) throw ParseError(source, line, "'" + std::string(key) + "' expects a non-negative integer, got '" + std::string(value) + "'");
        slot = *x;
    };

    MarketParams& p = cfg.params;
    if (key == "r") real(p.r);
    else if (key == "mu") real(p.mu);
    else if (key == "sigma") real(p.sigma);
    else if (key == "a") real(p.a);
    else if (key == "b") real(p.b);
    else if (key == "rho") real(p.rho);
    else if (key == "lambda") real(p.lambda);
    else if (key == "M") real(cfg.M);
    else if (key == "grid_n") count(cfg.grid_n);
    else if (key == "tol") real(cfg.tol);
    else if (key == "n_paths") count(cfg.sim.n_paths);
    else if (key == "dt") real(cfg.sim.dt);
    else if (key == "t_cap") real(cfg.sim.t_cap);
    else if (key == "z0") real(cfg.z0);
    else if (key == "seed") {
        const auto x = parse_int<std::uint64_t>(value);
        if (!x) throw ParseError(source, line, "'seed' expects an unsigned 64-bit integer, got '" + std::string(value) + "'");
        cfg.sim.seed = *x;
    } else if (key == "antithetic") {
        const auto x = parse_bool(value);
        if (!x) throw ParseError(source, line, "'antithetic' expects true or false, got '" + std::string(value) + "'");
        cfg.sim.antithetic = *x;
    } else if (key == "workers") {
        std::size_t w = 0;
        count(w);
        cfg.sim.workers = static_cast<unsigned>(w);
    } else if (key == "outdir") {
        cfg.outdir = std::string(value);
    } else {
        throw ParseError(source, line, "unknown key '" + std::string(key) + "'");
    }
}

RunConfig parse_json(const std::string& text, const std::string& source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, 1, e.what());
    }
    if (!doc.is_object()) throw ParseError(source, 1, "top level must be an object");

    RunConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        std::string as_text;
        if (value.is_string())
            as_text = value.get<std::string>();
        else if (value.is_number_float())
            as_text = format_double(value.get<double>());
        else if (value.is_number() || value.is_boolean())
            as_text = value.dump();
        else
            throw ParseError(source, 1, "'" + key + "' must be a number, boolean or string");
        apply(cfg, key, as_text, source, 1);
    }
    return cfg;
}

RunConfig parse_key_value(const std::string& text, const std::string& source) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s = raw;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ParseError(source, line, "expected key=value, got '" + std::string(s) + "'");
        const auto key = trim(s.substr(0, eq));
        const auto value = trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError(source, line, "missing key before '='");
        apply(cfg, key, value, source, line);
    }
    return cfg;
}

}  // namespace

std::vector<std::string> RunConfig::problems() const {
    std::vector<std::string> out = validate(params).violations;
    if (!(std::isfinite(M) && M > 0.0)) out.push_back("barrier M must be positive");
    if (grid_n < 101) out.push_back("grid_n must be at least 101");
    if (!(std::isfinite(tol) && tol > 0.0)) out.push_back("tol must be positive");
    try {
        sim.validate();
    } catch (const std::invalid_argument& e) {
        out.emplace_back(e.what());
    }
    if (!(std::isfinite(z0) && z0 > 0.0)) out.push_back("z0 must be positive");
    return out;
}

std::string RunConfig::canonical() const {
    std::ostringstream s;
    s << "r=" << format_double(params.r) << '\n'
      << "mu=" << format_double(params.mu) << '\n'
      << "sigma=" << format_double(params.sigma) << '\n'
      << "a=" << format_double(params.a) << '\n'
      << "b=" << format_double(params.b) << '\n'
      << "rho=" << format_double(params.rho) << '\n'
      << "lambda=" << format_double(params.lambda) << '\n'
      << "M=" << format_double(M) << '\n'
      << "grid_n=" << grid_n << '\n'
      << "tol=" << format_double(tol) << '\n'
      << "n_paths=" << sim.n_paths << '\n'
      << "dt=" << format_double(sim.dt) << '\n'
      << "seed=" << sim.seed << '\n'
      << "t_cap=" << format_double(sim.t_cap) << '\n'
      << "antithetic=" << (sim.antithetic ? "true" : "false") << '\n'
      << "z0=" << format_double(z0) << '\n';
    return s.str();
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical())); }

RunConfig parse_config(const std::string& text, const std::string& source) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return parse_json(text, source);
    return parse_key_value(text, source);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace ruin::cli
