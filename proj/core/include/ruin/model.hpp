// Market and mortality parameters for the lifetime-ruin problem, plus the
// transformed constants shared by every solver.
//
// Units are years throughout. Rates are per year, volatilities per sqrt(year).

#pragma once

#include <string>
#include <vector>

namespace ruin {

/// Primitive constants: riskless rate, risky asset (mu, sigma), consumption
/// diffusion (a, b), Brownian correlation rho and the hazard rate of death.
struct MarketParams {
    double r = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    double a = 0.0;
    double b = 0.0;
    double rho = 0.0;
    double lambda = 0.0;
};

/// The reference parameter set used across tests and the default config.
MarketParams reference_params();

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    std::string message() const;
};

ValidationReport validate(const MarketParams& p);

/// Constants of the reduced one-dimensional problem.
struct DerivedParams {
    double r_tilde = 0.0;
    double mu_tilde = 0.0;
    double rho_tilde = 0.0;
    double m = 0.0;       // half the squared Sharpe ratio of the excess return
    double excess = 0.0;  // mu - r - sigma*b*rho
};

/// Throws std::invalid_argument listing every violated constraint.
DerivedParams derive_params(const MarketParams& p);

/// Immutable (MarketParams, DerivedParams) pair handed to all solvers.
class Model {
public:
    explicit Model(const MarketParams& p);

    const MarketParams& market() const { return market_; }
    const DerivedParams& derived() const { return derived_; }

    /// b^2 (1 - rho^2): variance rate of the consumption noise orthogonal
    /// to the risky asset.
    double nu2() const { return nu2_; }
    double nu() const { return nu_; }
    /// (mu - r - sigma*b*rho) / sigma.
    double sharpe() const { return derived_.excess / market_.sigma; }

private:
    MarketParams market_;
    DerivedParams derived_;
    double nu2_;
    double nu_;
};

}  // namespace ruin
