#include "ldp/report.hpp"

#include <cmath>
#include <ostream>

namespace ldp {

namespace {

nlohmann::json number_or_null(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string csv_number(double x) {
    return std::isfinite(x) ? format_double(x) : std::string("nan");
}

const char* side_name(Side s) {
    return s == Side::upper ? "upper" : "lower";
}

}  // namespace

nlohmann::json to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json to_json(const ReferenceConstants& c) {
    return {{"C_r", c.C_r}, {"C0", c.C0}, {"C1", c.C1}, {"B_r", c.B_r},
            {"K_r", optional_json(c.K_r)}, {"N1", c.N1}, {"N0", c.N0},
            {"m2", optional_json(c.m2)}, {"m3", optional_json(c.m3)}, {"m4", optional_json(c.m4)}};
}

nlohmann::json to_json(const SpectralResult& s) {
    return {{"norm", s.norm},
            {"iterations", s.iterations},
            {"residual", s.residual},
            {"eigenfunction", std::vector<double>(s.eigenfunction.data(),
                                                  s.eigenfunction.data() + s.eigenfunction.size())}};
}

nlohmann::json to_json(const ExpansionResult& e) {
    return {{"norm", e.norm},
            {"truncation_order", e.truncation_order},
            {"sweeps", e.sweeps},
            {"residual", e.residual},
            {"tail_ratio", e.tail_ratio},
            {"perturbation_norm", e.perturbation_norm},
            {"guard", e.guard},
            {"gershgorin_warning", e.gershgorin_warning}};
}

nlohmann::json to_json(const OptimizationResult& r, bool include_minimizer) {
    nlohmann::json j{{"beta_target", r.beta_target},
                     {"beta_achieved", r.beta_achieved},
                     {"psi_value", r.psi_value},
                     {"lagrange_multiplier", r.lagrange_multiplier},
                     {"iterations", r.iterations},
                     {"outer_iterations", r.outer_iterations},
                     {"kkt_residual", number_or_null(r.kkt_residual)},
                     {"converged", r.converged},
                     {"endpoint", r.endpoint},
                     {"side", side_name(r.side)},
                     {"start", r.start}};
    if (include_minimizer) j["h_beta"] = to_json(r.h_beta.values());
    return j;
}

nlohmann::json to_json(const ScalingReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"epsilon", row.epsilon},
                        {"beta", row.beta},
                        {"side", side_name(row.side)},
                        {"psi", number_or_null(row.psi)},
                        {"beta_achieved", row.beta_achieved},
                        {"empirical", number_or_null(row.empirical)},
                        {"theory", row.theory},
                        {"ratio", number_or_null(row.ratio)},
                        {"minimizer_direction_err", number_or_null(row.direction_error)},
                        {"converged", row.converged},
                        {"empirical_resolution_extrapolated", optional_json(row.empirical_resolution_extrapolated)},
                        {"error", row.error}});
    }
    return {{"regime", to_string(r.regime)},
            {"resolution", r.resolution},
            {"constants", to_json(r.constants)},
            {"rows", rows},
            {"ratio_extrapolated_upper", optional_json(r.ratio_extrapolated_upper)},
            {"ratio_extrapolated_lower", optional_json(r.ratio_extrapolated_lower)}};
}

nlohmann::json to_json(const SampleStats& s) {
    return {{"n_vertices", s.n_vertices}, {"replicates", s.replicates}, {"seed", s.seed},
            {"derived_seeds", s.derived_seeds}, {"values", s.values}, {"mean", s.mean},
            {"stddev", s.stddev}, {"q05", s.q05}, {"q50", s.q50}, {"q95", s.q95},
            {"generator", s.generator}};
}

void write_psi_csv(std::ostream& out, const std::vector<PsiRow>& rows) {
    out << "beta,psi,converged,kkt_residual,warmstart,beta_achieved,step_l2\n";
    for (const auto& r : rows) {
        out << csv_number(r.beta) << ',' << csv_number(r.psi) << ',' << (r.converged ? 1 : 0) << ','
            << csv_number(r.kkt_residual) << ',' << (r.warmstart ? 1 : 0) << ',' << csv_number(r.beta_achieved)
            << ',' << csv_number(r.step_l2) << '\n';
    }
}

void write_scaling_csv(std::ostream& out, const ScalingReport& report) {
    out << "epsilon,empirical,theory,ratio,minimizer_direction_err,side,beta,psi,converged\n";
    for (const auto& r : report.rows) {
        out << csv_number(r.epsilon) << ',' << csv_number(r.empirical) << ',' << csv_number(r.theory) << ','
            << csv_number(r.ratio) << ',' << csv_number(r.direction_error) << ',' << side_name(r.side) << ','
            << csv_number(r.beta) << ',' << csv_number(r.psi) << ',' << (r.converged ? 1 : 0) << '\n';
    }
}

void write_sample_csv(std::ostream& out, const SampleStats& stats) {
    out << "index,derived_seed,lambda_over_n\n";
    for (std::size_t i = 0; i < stats.values.size(); ++i) {
        out << i << ',' << stats.derived_seeds[i] << ',' << csv_number(stats.values[i]) << '\n';
    }
}

}  // namespace ldp
