#pragma once

#include <optional>

#include "ldp/graphon.hpp"

namespace ldp {

/// R(a | b) = a log(a/b) + (1-a) log((1-a)/(1-b)), with 0 log 0 = 0.
/// Throws DomainError unless a in [0, 1] and b in (0, 1).
double bernoulli_relent(double a, double b);

/// d/da R(a | b) = log(a/b) - log((1-a)/(1-b)) for a in (0, 1).
double bernoulli_relent_derivative(double a, double b);

/// I_r(h) = (1/N^2) sum_ij R(h_ij | r_ij). Throws ResolutionMismatch.
double rate_I(const GridGraphon& h, const ReferenceGraphon& r);
double rate_I(const GridGraphon& h, const GridGraphon& r);

/// Closed-form constants attached to a reference graphon. Integrals are block sums.
struct ReferenceConstants {
    double C_r = 0.0;  ///< ||T_r||
    double C0 = 0.0;   ///< I_r(0)
    double C1 = 0.0;   ///< I_r(1)
    double B_r = 0.0;  ///< int r^3 (1 - r)
    double N1 = 0.0;   ///< int (1 - r) / r
    double N0 = 0.0;   ///< int r / (1 - r)
    /// Rank-1 only: C_r^2 / (2 B_r) and the moments m_k = (1/N) sum nu_i^k.
    std::optional<double> K_r;
    std::optional<double> m2;
    std::optional<double> m3;
    std::optional<double> m4;
};

/// Propagates NoConvergence from the eigensolver.
ReferenceConstants reference_constants(const ReferenceGraphon& r);

/// r -> 1 - r with the same eta certificate; structure is re-detected.
ReferenceGraphon reflect(const ReferenceGraphon& r);

}  // namespace ldp
