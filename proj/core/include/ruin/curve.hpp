// Uniform grids and gridded value functions with derivative estimates.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ruin {

struct Grid {
    double lower = 0.0;
    double upper = 1.0;
    std::size_t n = 3;

    /// Throws std::invalid_argument unless n >= 3 and upper > lower.
    static Grid make(double lower, double upper, std::size_t n);

    double h() const { return (upper - lower) / static_cast<double>(n - 1); }
    double at(std::size_t i) const;
    bool contains(double x) const { return x >= lower && x <= upper; }
    /// Index of the cell [at(i), at(i+1)] containing x (clamped to the grid).
    std::size_t cell(double x) const;
};

enum class CurveKind { primal_M, primal_unbounded, dual_game, dual_transform };

std::string_view to_string(CurveKind kind);

/// A scalar function sampled on a uniform grid with first and second
/// derivative estimates at every node.
struct ValueCurve {
    Grid grid;
    std::vector<double> values;
    std::vector<double> d1;
    std::vector<double> d2;
    CurveKind kind = CurveKind::primal_M;

    /// Piecewise cubic Hermite through the nodes using the stored slopes,
    /// limited (Fritsch-Carlson) so monotone data stays monotone. Throws
    /// std::out_of_range outside the grid.
    double value_at(double x) const;
    /// Linear interpolation of the stored first derivative.
    double d1_at(double x) const;
    /// Linear interpolation of the stored second derivative.
    double d2_at(double x) const;
};

/// Dollar amount held in the second risky asset, as a feedback of wealth.
struct PolicyCurve {
    Grid grid;
    std::vector<double> pi;

    /// Linear interpolation; throws std::out_of_range outside the grid.
    double at(double z) const;
};

namespace detail {

double linear_interp(const Grid& grid, std::span<const double> ys, double x);

/// Central differences on the interior; second-order one-sided first
/// derivatives at both ends, second derivatives copied from the nearest
/// interior stencil.
void finite_differences(const Grid& grid, std::span<const double> values, std::vector<double>& d1,
                        std::vector<double>& d2);

}  // namespace detail

}  // namespace ruin
