#pragma once

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "ldp/expansion.hpp"
#include "ldp/montecarlo.hpp"
#include "ldp/optimizer.hpp"
#include "ldp/rate.hpp"
#include "ldp/spectral.hpp"

namespace ldp {

nlohmann::json to_json(const ReferenceConstants& c);
nlohmann::json to_json(const SpectralResult& s);
nlohmann::json to_json(const ExpansionResult& e);
nlohmann::json to_json(const OptimizationResult& r, bool include_minimizer = false);
nlohmann::json to_json(const ScalingReport& r);
nlohmann::json to_json(const SampleStats& s);
nlohmann::json to_json(const Matrix& m);

// CSV writers: header row, '.' decimal, 17 significant digits.
void write_psi_csv(std::ostream& out, const std::vector<PsiRow>& rows);
void write_scaling_csv(std::ostream& out, const ScalingReport& report);
void write_sample_csv(std::ostream& out, const SampleStats& stats);

}  // namespace ldp
