#pragma once

#include <stdexcept>
#include <string>

namespace ruin {

/// A numerical solve failed to produce a solution satisfying its contract.
/// `last_residual` carries the final convergence measure where one exists.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what, double last_residual = 0.0)
        : std::runtime_error(what), last_residual_(last_residual) {}

    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

}  // namespace ruin
