#include "ruin/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <vector>

namespace ruin {

ParseError::ParseError(std::string source, std::size_t line, const std::string& reason)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + reason), source_(std::move(source)), line_(line) {}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double x = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
    return x;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t x) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, x >>= 4) s[static_cast<std::size_t>(i)] = digits[x & 0xf];
    return s;
}

namespace {

void write_row(std::ostream& out, std::initializer_list<double> xs) {
    bool first = true;
    for (double x : xs) {
        if (!first) out << ',';
        out << format_double(x);
        first = false;
    }
    out << '\n';
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

}  // namespace

void write_primal_csv(std::ostream& out, const ValueCurve& curve, const PolicyCurve& policy) {
    out << "z,phi,dphi,ddphi,pi\n";
    for (std::size_t i = 0; i < curve.grid.n; ++i)
        write_row(out, {curve.grid.at(i), curve.values[i], curve.d1[i], curve.d2[i], policy.pi[i]});
}

PrimalTable read_primal_csv(std::istream& in, const std::string& source) {
    static constexpr std::string_view header = "z,phi,dphi,ddphi,pi";
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(source, 1, "empty file, expected header '" + std::string(header) + "'");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header)
        throw ParseError(source, line_no, "bad header '" + line + "', expected '" + std::string(header) + "'");

    std::array<std::vector<double>, 5> cols;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != cols.size())
            throw ParseError(source, line_no,
                             "expected 5 fields, got " + std::to_string(fields.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto x = parse_double(fields[k]);
            if (!x || !std::isfinite(*x))
                throw ParseError(source, line_no,
                                 "field " + std::to_string(k + 1) + " is not a finite number: '" + std::string(fields[k]) + "'");
            cols[k].push_back(*x);
        }
    }
    const std::size_t n = cols[0].size();
    if (n < 3) throw ParseError(source, line_no, "need at least 3 rows, got " + std::to_string(n));

    const auto& z = cols[0];
    const double h = (z.back() - z.front()) / static_cast<double>(n - 1);
    if (!(h > 0.0)) throw ParseError(source, 2, "z column must be increasing");
    for (std::size_t i = 0; i < n; ++i) {
        const double expect = z.front() + h * static_cast<double>(i);
        if (std::abs(z[i] - expect) > 1e-9 * h + 1e-12 * std::abs(expect))
            throw ParseError(source, i + 2, "z column is not uniformly spaced");
    }

    PrimalTable t;
    t.curve.grid = Grid::make(z.front(), z.back(), n);
    t.curve.values = std::move(cols[1]);
    t.curve.d1 = std::move(cols[2]);
    t.curve.d2 = std::move(cols[3]);
    t.curve.kind = CurveKind::primal_M;
    t.policy.grid = t.curve.grid;
    t.policy.pi = std::move(cols[4]);
    return t;
}

void write_residual_csv(std::ostream& out, const ResidualProfile& profile) {
    out << "z,residual\n";
    for (std::size_t i = 0; i < profile.z.size(); ++i) write_row(out, {profile.z[i], profile.residual[i]});
}

void write_dual_csv(std::ostream& out, const DualSolution& sol, const AlphaCurve& alpha) {
    out << "y,ghat,dghat,ddghat,alpha\n";
    const ValueCurve& c = sol.curve;
    const double lo = alpha.y.front();
    const double hi = alpha.y.back();
    for (std::size_t i = 0; i < c.grid.n; ++i) {
        const double y = c.grid.at(i);
        const double a = (y >= lo && y <= hi) ? alpha.at(y) : 0.0;
        write_row(out, {y, c.values[i], c.d1[i], c.d2[i], a});
    }
}

void write_transform_csv(std::ostream& out, const ValueCurve& curve) {
    out << "z,Phi,dPhi,ddPhi\n";
    for (std::size_t i = 0; i < curve.grid.n; ++i)
        write_row(out, {curve.grid.at(i), curve.values[i], curve.d1[i], curve.d2[i]});
}

void write_paths_csv(std::ostream& out, const SimResult& result) {
    out << "path_id,outcome,tau,payoff\n";
    for (const PathRecord& p : result.paths)
        out << p.path_id << ',' << to_string(p.outcome) << ',' << format_double(p.tau) << ','
            << format_double(p.payoff) << '\n';
}

}  // namespace ruin
