#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ruin/io.hpp"

using namespace ruin;

namespace {

ValueCurve small_primal() {
    static const ValueCurve c = solve_primal(Model(reference_params()), 40.0, 201, 1e-10);
    return c;
}

std::string expect_parse_error(const std::string& text, std::size_t line) {
    std::istringstream in(text);
    try {
        read_primal_csv(in, "primal.csv");
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), line) << e.what();
        EXPECT_EQ(e.source(), "primal.csv");
        return e.what();
    }
    ADD_FAILURE() << "no ParseError for:\n" << text.substr(0, 200);
    return {};
}

}  // namespace

TEST(FormatDouble, RoundTripsExactly) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::uint64_t> bits;
    for (int i = 0; i < 20000; ++i) {
        double x;
        const std::uint64_t b = bits(rng);
        std::memcpy(&x, &b, sizeof x);
        if (!std::isfinite(x)) continue;
        const auto back = parse_double(format_double(x));
        ASSERT_TRUE(back.has_value()) << format_double(x);
        ASSERT_EQ(*back, x) << format_double(x);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0), "1");
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(ParseDouble, IsStrict) {
    EXPECT_EQ(parse_double(" 2.5 ").value(), 2.5);
    EXPECT_EQ(parse_double("+1e-3").value(), 1e-3);
    EXPECT_FALSE(parse_double("").has_value());
    EXPECT_FALSE(parse_double("1.0x").has_value());
    EXPECT_FALSE(parse_double("abc").has_value());
    EXPECT_FALSE(parse_double("1 2").has_value());
}

TEST(Fnv1a, KnownVectors) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
    EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
    EXPECT_EQ(hex64(0xaf63dc4c8601ec8cull), "af63dc4c8601ec8c");
    EXPECT_EQ(hex64(1), "0000000000000001");
}

TEST(PrimalCsv, RoundTripIsExact) {
    const Model model(reference_params());
    const ValueCurve c = small_primal();
    const PolicyCurve p = feedback_policy(c, model);
    std::stringstream buf;
    write_primal_csv(buf, c, p);
    const std::string text = buf.str();
    EXPECT_EQ(text.rfind("z,phi,dphi,ddphi,pi\n", 0), 0u);

    std::istringstream in(text);
    const PrimalTable t = read_primal_csv(in, "mem");
    ASSERT_EQ(t.curve.grid.n, c.grid.n);
    EXPECT_EQ(t.curve.grid.upper, c.grid.upper);
    EXPECT_EQ(t.curve.values, c.values);
    EXPECT_EQ(t.curve.d1, c.d1);
    EXPECT_EQ(t.curve.d2, c.d2);
    EXPECT_EQ(t.policy.pi, p.pi);

    std::stringstream again;
    write_primal_csv(again, t.curve, t.policy);
    EXPECT_EQ(again.str(), text);
}

TEST(PrimalCsv, DiagnosticsNameTheLine) {
    const std::string header = "z,phi,dphi,ddphi,pi\n";
    expect_parse_error("", 1);
    expect_parse_error("z,phi\n0,1\n", 1);
    const std::string good = header + "0,1,-0.1,0.01,1\n1,0.5,-0.1,0.01,1\n2,0,-0.1,0.01,1\n";
    const std::string what = expect_parse_error(header + "0,1,-0.1,0.01,1\n1,0.5,oops,0.01,1\n2,0,-0.1,0.01,1\n", 3);
    EXPECT_NE(what.find("oops"), std::string::npos);
    expect_parse_error(header + "0,1,-0.1,0.01,1\n1,0.5,-0.1\n", 3);
    expect_parse_error(header + "0,1,-0.1,0.01,1\n1,0.5,-0.1,0.01,1\n", 3);
    expect_parse_error(header + "0,1,-0.1,0.01,1\n1.5,0.5,-0.1,0.01,1\n2,0,-0.1,0.01,1\n", 3);
    expect_parse_error(header + "0,1,-0.1,0.01,1\n1,nan,-0.1,0.01,1\n2,0,-0.1,0.01,1\n", 3);
    std::istringstream in(good);
    EXPECT_EQ(read_primal_csv(in, "ok").curve.grid.n, 3u);
}

TEST(OtherCsv, HeadersAndRowCounts) {
    const Model model(reference_params());
    const ValueCurve c = small_primal();
    std::stringstream r;
    write_residual_csv(r, hjb_residual(c, model));
    EXPECT_EQ(r.str().rfind("z,residual\n", 0), 0u);

    DualOptions opts;
    opts.grid_n = 301;
    const DualSolution sol = solve_dual(model, 40.0, 1e-10, opts);
    std::stringstream d;
    write_dual_csv(d, sol, alpha_star(sol, model));
    const std::string text = d.str();
    EXPECT_EQ(text.rfind("y,ghat,dghat,ddghat,alpha\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 302);

    SimResult s;
    s.paths = {{0, PathOutcome::absorbed_low, 1.5, 0.25}, {1, PathOutcome::capped, 200.0, 0.0}};
    std::stringstream p;
    write_paths_csv(p, s);
    EXPECT_EQ(p.str(), "path_id,outcome,tau,payoff\n0,absorbed_low,1.5,0.25\n1,capped,200,0\n");
}
