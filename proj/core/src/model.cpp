#include "ruin/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ruin {

MarketParams reference_params() {
    return MarketParams{.r = 0.02, .mu = 0.06, .sigma = 0.2, .a = 0.0, .b = 0.1, .rho = 0.0, .lambda = 0.04};
}

std::string ValidationReport::message() const {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v;
    }
    return out;
}

ValidationReport validate(const MarketParams& p) {
    ValidationReport report;
    auto check_finite = [&](double v, const char* name) {
        if (!std::isfinite(v)) report.violations.push_back(std::string(name) + " must be finite");
        return std::isfinite(v);
    };

    check_finite(p.mu, "mu");
    check_finite(p.a, "a");
    if (check_finite(p.r, "r") && !(p.r > 0.0)) report.violations.emplace_back("r must be positive");
    if (check_finite(p.sigma, "sigma") && !(p.sigma > 0.0))
        report.violations.emplace_back("sigma must be positive");
    if (check_finite(p.b, "b") && !(p.b > 0.0)) report.violations.emplace_back("b must be positive");
    if (check_finite(p.lambda, "lambda") && !(p.lambda > 0.0))
        report.violations.emplace_back("lambda must be positive");
    if (check_finite(p.rho, "rho")) {
        if (std::abs(p.rho) == 1.0)
            report.violations.emplace_back("|rho| = 1 precluded");
        else if (std::abs(p.rho) > 1.0)
            report.violations.emplace_back("rho must lie strictly inside (-1, 1)");
    }
    return report;
}

DerivedParams derive_params(const MarketParams& p) {
    if (auto report = validate(p); !report.ok())
        throw std::invalid_argument("invalid market parameters: " + report.message());

    DerivedParams d;
    d.excess = p.mu - p.r - p.sigma * p.b * p.rho;
    d.r_tilde = p.r - p.a + p.b * p.b + d.excess * p.rho * p.b / p.sigma;
    d.mu_tilde = d.excess + d.r_tilde;

    const double nu2 = p.b * p.b * (1.0 - p.rho * p.rho);
    d.rho_tilde = std::sqrt(nu2) / std::sqrt(nu2 + p.sigma * p.sigma);

    const double sharpe = d.excess / p.sigma;
    d.m = 0.5 * sharpe * sharpe;
    return d;
}

Model::Model(const MarketParams& p)
    : market_(p),
      derived_(derive_params(p)),
      nu2_(p.b * p.b * (1.0 - p.rho * p.rho)),
      nu_(std::sqrt(nu2_)) {}

}  // namespace ruin
