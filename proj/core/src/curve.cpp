#include "ruin/curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ruin {

Grid Grid::make(double lower, double upper, std::size_t n) {
    if (n < 3) throw std::invalid_argument("grid needs at least 3 points, got " + std::to_string(n));
    if (!(upper > lower) || !std::isfinite(lower) || !std::isfinite(upper))
        throw std::invalid_argument("grid bounds must satisfy lower < upper");
    return Grid{lower, upper, n};
}

double Grid::at(std::size_t i) const {
    if (i + 1 == n) return upper;
    return lower + static_cast<double>(i) * h();
}

std::size_t Grid::cell(double x) const {
    const double s = (x - lower) / h();
    if (!(s > 0.0)) return 0;
    const auto i = static_cast<std::size_t>(s);
    return std::min(i, n - 2);
}

std::string_view to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::primal_M: return "primal_M";
        case CurveKind::primal_unbounded: return "primal_unbounded";
        case CurveKind::dual_game: return "dual_game";
        case CurveKind::dual_transform: return "dual_transform";
    }
    return "unknown";
}

namespace {

void require_inside(const Grid& grid, double x) {
    // Allow a few ulps of slack at the ends so that grid.at(n-1) round trips.
    const double slack = 1e-12 * std::max(1.0, std::abs(grid.upper - grid.lower));
    if (!(x >= grid.lower - slack && x <= grid.upper + slack))
        throw std::out_of_range("query " + std::to_string(x) + " outside grid [" + std::to_string(grid.lower) +
                                ", " + std::to_string(grid.upper) + "]");
}

}  // namespace

namespace detail {

double linear_interp(const Grid& grid, std::span<const double> ys, double x) {
    require_inside(grid, x);
    const std::size_t i = grid.cell(x);
    const double x0 = grid.at(i);
    const double t = std::clamp((x - x0) / grid.h(), 0.0, 1.0);
    return ys[i] + t * (ys[i + 1] - ys[i]);
}

void finite_differences(const Grid& grid, std::span<const double> f, std::vector<double>& d1,
                        std::vector<double>& d2) {
    const std::size_t n = f.size();
    const double h = grid.h();
    d1.assign(n, 0.0);
    d2.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        d1[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
        d2[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
    }
    d1[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d1[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d2[0] = d2[1];
    d2[n - 1] = d2[n - 2];
}

}  // namespace detail

double ValueCurve::value_at(double x) const {
    require_inside(grid, x);
    const std::size_t i = grid.cell(x);
    const double h = grid.h();
    const double t = std::clamp((x - grid.at(i)) / h, 0.0, 1.0);
    const double y0 = values[i];
    const double y1 = values[i + 1];
    double m0 = d1[i];
    double m1 = d1[i + 1];

    const double secant = (y1 - y0) / h;
    if (secant == 0.0) {
        m0 = m1 = 0.0;
    } else {
        if (m0 * secant < 0.0) m0 = 0.0;
        if (m1 * secant < 0.0) m1 = 0.0;
        const double a = m0 / secant;
        const double b = m1 / secant;
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            m0 = tau * a * secant;
            m1 = tau * b * secant;
        }
    }

    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
}

double ValueCurve::d1_at(double x) const { return detail::linear_interp(grid, d1, x); }

double ValueCurve::d2_at(double x) const { return detail::linear_interp(grid, d2, x); }

double PolicyCurve::at(double z) const { return detail::linear_interp(grid, pi, z); }

}  // namespace ruin
