#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldp/graphon.hpp"

namespace ldp {

/// Builtin reference families: constant(p), rank1 (nu given by polynomial coefficients in x,
/// evaluated at block midpoints), two_block(p11, p12, p22, split) and file(path).
struct ReferenceSpec {
    std::string family = "constant";
    std::size_t resolution = 64;
    double p = 0.5;
    std::vector<double> nu_coefficients{0.3, 0.4};
    double p11 = 0.6;
    double p12 = 0.3;
    double p22 = 0.5;
    double split = 0.5;
    std::string path;
    /// Certificate; defaults to the largest valid value min(min r, 1 - max r).
    std::optional<double> eta;
};

ReferenceGraphon build_reference(const ReferenceSpec& spec);

/// Evaluates sum_k c_k x^k at the N block midpoints.
Vector polynomial_at_midpoints(const std::vector<double>& coefficients, std::size_t n);

void to_json(nlohmann::json& j, const ReferenceSpec& spec);
void from_json(const nlohmann::json& j, ReferenceSpec& spec);

}  // namespace ldp
