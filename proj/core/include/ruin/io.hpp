// Plain-text artifacts: shortest round-trip number formatting, curve CSVs
// and their readers.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ruin/curve.hpp"
#include "ruin/fbp_dual.hpp"
#include "ruin/mc_sim.hpp"
#include "ruin/pde_primal.hpp"

namespace ruin {

/// Malformed input. what() reads "<source>:<line>: <reason>".
class ParseError : public std::runtime_error {
public:
    ParseError(std::string source, std::size_t line, const std::string& reason);

    const std::string& source() const { return source_; }
    std::size_t line() const { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

/// Shortest decimal that parses back to the same double ("nan", "inf",
/// "-inf" for non-finite values).
std::string format_double(double x);

/// Strict full-string parse; nullopt on trailing junk or empty input.
std::optional<double> parse_double(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t x);

/// z,phi,dphi,ddphi,pi
void write_primal_csv(std::ostream& out, const ValueCurve& curve, const PolicyCurve& policy);

/// Inverse of write_primal_csv. The z column must be uniform and increasing.
struct PrimalTable {
    ValueCurve curve;
    PolicyCurve policy;
};
PrimalTable read_primal_csv(std::istream& in, const std::string& source);

/// z,residual
void write_residual_csv(std::ostream& out, const ResidualProfile& profile);

/// y,ghat,dghat,ddghat,alpha on the dual grid. alpha is zero in the stopping
/// region, where no control is exercised.
void write_dual_csv(std::ostream& out, const DualSolution& sol, const AlphaCurve& alpha);

/// z,Phi,dPhi,ddPhi
void write_transform_csv(std::ostream& out, const ValueCurve& curve);

/// path_id,outcome,tau,payoff
void write_paths_csv(std::ostream& out, const SimResult& result);

}  // namespace ruin
