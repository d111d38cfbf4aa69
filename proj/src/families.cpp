#include "ldp/families.hpp"

#include <algorithm>

#include "ldp/errors.hpp"

namespace ldp {

Vector polynomial_at_midpoints(const std::vector<double>& coefficients, std::size_t n) {
    Vector nu(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        double acc = 0.0;
        for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
        nu(static_cast<Eigen::Index>(i)) = acc;
    }
    return nu;
}

namespace {

double default_eta(const GridGraphon& g) {
    const double lo = g.values().minCoeff();
    const double hi = g.values().maxCoeff();
    return std::min({lo, 1.0 - hi, 0.5});
}

}  // namespace

ReferenceGraphon build_reference(const ReferenceSpec& spec) {
    if (spec.family == "file") {
        GridGraphon g = load_grid(spec.path);
        return validate_reference(g, spec.eta.value_or(default_eta(g)));
    }
    if (spec.resolution < 1) throw DomainError("resolution must be positive");
    if (spec.family == "constant") {
        GridGraphon g = GridGraphon::constant(spec.resolution, spec.p);
        return validate_reference(g, spec.eta.value_or(default_eta(g)));
    }
    if (spec.family == "rank1") {
        if (spec.nu_coefficients.empty()) throw DomainError("rank1 family needs nu coefficients");
        const Vector nu = polynomial_at_midpoints(spec.nu_coefficients, spec.resolution);
        const GridGraphon g(nu * nu.transpose());
        return make_rank1_reference(nu, spec.eta.value_or(default_eta(g)));
    }
    if (spec.family == "two_block") {
        if (!(spec.split > 0.0 && spec.split < 1.0)) throw DomainError("two_block split must lie in (0, 1)");
        GridGraphon g = GridGraphon::from_kernel(spec.resolution, [&spec](double x, double y) {
            const bool a = x < spec.split;
            const bool b = y < spec.split;
            return a && b ? spec.p11 : (!a && !b ? spec.p22 : spec.p12);
        });
        return validate_reference(g, spec.eta.value_or(default_eta(g)));
    }
    throw DomainError("unknown reference family '" + spec.family + "'");
}

void to_json(nlohmann::json& j, const ReferenceSpec& spec) {
    j = nlohmann::json{{"family", spec.family}, {"resolution", spec.resolution}};
    if (spec.family == "constant") j["p"] = spec.p;
    if (spec.family == "rank1") j["nu_coefficients"] = spec.nu_coefficients;
    if (spec.family == "two_block") {
        j["p11"] = spec.p11;
        j["p12"] = spec.p12;
        j["p22"] = spec.p22;
        j["split"] = spec.split;
    }
    if (spec.family == "file") j["path"] = spec.path;
    j["eta"] = spec.eta ? nlohmann::json(*spec.eta) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ReferenceSpec& spec) {
    spec.family = j.value("family", spec.family);
    spec.resolution = j.value("resolution", spec.resolution);
    spec.p = j.value("p", spec.p);
    spec.nu_coefficients = j.value("nu_coefficients", spec.nu_coefficients);
    spec.p11 = j.value("p11", spec.p11);
    spec.p12 = j.value("p12", spec.p12);
    spec.p22 = j.value("p22", spec.p22);
    spec.split = j.value("split", spec.split);
    spec.path = j.value("path", spec.path);
    if (j.contains("eta") && !j["eta"].is_null()) spec.eta = j["eta"].get<double>();
}

}  // namespace ldp
