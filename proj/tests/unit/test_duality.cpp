#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ruin/duality.hpp"
#include "ruin/pde_primal.hpp"

using namespace ruin;

namespace {

const Model& reference() {
    static const Model m(reference_params());
    return m;
}

const DualSolution& game40() {
    static const DualSolution s = solve_dual(reference(), 40.0, 1e-10);
    return s;
}

const ValueCurve& phi40() {
    static const ValueCurve c = solve_primal(reference(), 40.0, 4001, 1e-10);
    return c;
}

}  // namespace

TEST(Legendre, EndpointIdentities) {
    EXPECT_EQ(legendre_at(game40(), 0.0).value, 1.0);
    EXPECT_EQ(legendre_at(game40(), 40.0).value, 0.0);
    EXPECT_EQ(legendre_at(game40(), 55.0).value, 0.0);
    const ValueCurve t = legendre_concave(game40());
    EXPECT_EQ(t.kind, CurveKind::dual_transform);
    EXPECT_EQ(t.values.front(), 1.0);
    EXPECT_EQ(t.values.back(), 0.0);
}

TEST(Legendre, MatchesGridArgmaxOracle) {
    // The oracle is first order in the dual spacing; with slopes bounded by M
    // its error is at most M h_dual.
    const double bound = 40.0 * game40().curve.grid.h();
    for (double z = 0.5; z < 40.0; z += 1.7) {
        const double slope = legendre_at(game40(), z).value;
        const double brute = oracle::grid_argmax_legendre(game40().curve, z);
        EXPECT_GE(slope, brute - 1e-12) << z;  // the max over nodes cannot exceed the true max
        EXPECT_NEAR(slope, brute, bound) << z;
    }
}

TEST(Legendre, ArgmaxInvertsSlope) {
    for (double z : {1.0, 10.0, 30.0}) {
        const ConjugatePoint cp = legendre_at(game40(), z);
        EXPECT_GT(cp.argmax, game40().boundary.y_M);
        EXPECT_LT(cp.argmax, game40().boundary.y_0);
        EXPECT_NEAR(game40().curve.d1_at(cp.argmax), z, 1e-3 * z);
    }
}

TEST(Legendre, TransformIsConvexAndDecreasing) {
    const ValueCurve t = legendre_concave(game40(), 4001);
    for (std::size_t i = 0; i + 1 < t.grid.n; ++i) ASSERT_LE(t.values[i + 1] - t.values[i], 1e-12) << i;
    for (std::size_t i = 1; i + 1 < t.grid.n; ++i)
        ASSERT_GE(t.values[i + 1] - 2.0 * t.values[i] + t.values[i - 1], -1e-10) << i;
}

TEST(Legendre, TransformSolvesPrimalEquation) {
    const ValueCurve t = legendre_concave(game40(), 4001);
    EXPECT_LT(hjb_residual(t, reference()).sup(), 5e-3);
}

TEST(Legendre, RejectsSlopeRangeNotCoveringBarrier) {
    DualSolution broken = game40();
    for (double& d : broken.curve.d1) d = std::min(d, 20.0);
    EXPECT_THROW(legendre_concave(broken), SolverError);
}

TEST(BoundaryFromPrimal, MatchesShooting) {
    const FreeBoundary b = boundary_from_primal(phi40());
    EXPECT_GE(b.y_M, 0.0);
    EXPECT_GE(b.y_0, b.y_M);
    EXPECT_GE(b.y_0, reference().market().lambda);
    EXPECT_NEAR(b.y_M, game40().boundary.y_M, 1e-2);
    EXPECT_NEAR(b.y_0, game40().boundary.y_0, 1e-2);
    EXPECT_NEAR(b.y_M, oracle::kYM, 1e-5);
    EXPECT_NEAR(b.y_0, oracle::kY0, 1e-5);
}

TEST(BiconjugateCheck, ReferenceReport) {
    const DualityReport rep = biconjugate_check(game40(), phi40());
    EXPECT_LE(rep.sup_gap, 5e-3);
    EXPECT_LE(rep.biconjugate_gap, 5e-3);
    EXPECT_LE(rep.boundary_gap_yM, 1e-2);
    EXPECT_LE(rep.boundary_gap_y0, 1e-2);
    EXPECT_GE(rep.sup_gap, 0.0);
    EXPECT_GE(rep.boundary_gap_yM, 0.0);
    EXPECT_GE(rep.boundary_gap_y0, 0.0);
    EXPECT_DOUBLE_EQ(rep.h_primal, 0.01);
    ASSERT_EQ(rep.slope_checks.size(), 10u);
    for (const SlopeCheck& s : rep.slope_checks) {
        EXPECT_TRUE(s.passed) << s.z;
        EXPECT_LE(s.relative_error, kSlopeCurvatureRelTol);
        EXPECT_LE(s.slope_error, kSlopeAbsTol);
        EXPECT_GT(s.z, 0.0);
        EXPECT_LT(s.z, 40.0);
    }
}

TEST(BiconjugateCheck, CoarseGridGapsGrowWithSpacing) {
    const ValueCurve coarse = solve_primal(reference(), 40.0, 101, 1e-10);
    DualOptions opts;
    opts.grid_n = 101;
    const DualSolution g = solve_dual(reference(), 40.0, 1e-10, opts);
    const DualityReport rep = biconjugate_check(g, coarse);
    const DualityReport fine = biconjugate_check(game40(), phi40());
    EXPECT_GT(rep.sup_gap, fine.sup_gap);
    EXPECT_DOUBLE_EQ(rep.h_primal, 0.4);
    const double scale = rep.h_primal / 0.01;
    EXPECT_LE(rep.sup_gap, 5e-3 * scale);
    EXPECT_LE(rep.boundary_gap_yM, 1e-2 * scale);
    EXPECT_LE(rep.boundary_gap_y0, 1e-2 * scale);
    // Still within the unscaled limits too.
    EXPECT_LE(rep.sup_gap, 5e-3);
}

TEST(DualityProperty, HoldsAcrossParameterSets) {
    struct Case {
        double r, mu, sigma, a, b, rho, lambda, M;
    };
    const Case cases[] = {
        {0.02, 0.06, 0.2, 0.0, 0.1, 0.0, 0.04, 40.0},
        {0.03, 0.08, 0.25, 0.01, 0.15, 0.3, 0.05, 30.0},
        {0.01, 0.05, 0.18, -0.01, 0.08, -0.4, 0.03, 50.0},
        {0.04, 0.07, 0.3, 0.02, 0.2, 0.1, 0.06, 25.0},
    };
    for (const Case& c : cases) {
        const Model model({c.r, c.mu, c.sigma, c.a, c.b, c.rho, c.lambda});
        const ValueCurve f = solve_primal(model, c.M, 2001, 1e-10);
        const DualSolution g = solve_dual(model, c.M, 1e-10);
        const DualityReport rep = biconjugate_check(g, f);
        EXPECT_LE(rep.sup_gap, 5e-3) << c.M;
        EXPECT_LE(rep.boundary_gap_yM, 1e-2) << c.M;
        EXPECT_LE(rep.boundary_gap_y0, 1e-2) << c.M;
        EXPECT_LT(g.boundary.y_M, 1.0 / c.M);
        EXPECT_LE(c.lambda, g.boundary.y_0);
    }
}
