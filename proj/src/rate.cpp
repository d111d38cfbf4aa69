#include "ldp/rate.hpp"

#include <cmath>

#include "ldp/errors.hpp"
#include "ldp/spectral.hpp"

namespace ldp {

double bernoulli_relent(double a, double b) {
    if (!(b > 0.0 && b < 1.0)) throw DomainError("bernoulli_relent: b must lie in (0, 1)");
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("bernoulli_relent: a must lie in [0, 1]");
    if (a == 0.0) return -std::log1p(-b);
    if (a == 1.0) return -std::log(b);
    return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
}

double bernoulli_relent_derivative(double a, double b) {
    if (!(b > 0.0 && b < 1.0) || !(a > 0.0 && a < 1.0)) {
        throw DomainError("bernoulli_relent_derivative: arguments must lie in (0, 1)");
    }
    return std::log(a / b) - std::log((1.0 - a) / (1.0 - b));
}

double rate_I(const GridGraphon& h, const GridGraphon& r) {
    if (h.resolution() != r.resolution()) {
        throw ResolutionMismatch("rate_I: resolutions differ");
    }
    const Matrix& hv = h.values();
    const Matrix& rv = r.values();
    const Eigen::Index n = hv.rows();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            sum += bernoulli_relent(hv(i, j), rv(i, j));
        }
    }
    return sum / static_cast<double>(n * n);
}

double rate_I(const GridGraphon& h, const ReferenceGraphon& r) {
    return rate_I(h, r.grid());
}

ReferenceConstants reference_constants(const ReferenceGraphon& r) {
    const Matrix& v = r.grid().values();
    const double nn = static_cast<double>(v.size());
    ReferenceConstants c;
    c.C_r = operator_norm(r.grid()).norm;
    const auto ones = Matrix::Ones(v.rows(), v.cols());
    c.C0 = -(ones - v).array().log().sum() / nn;
    c.C1 = -v.array().log().sum() / nn;
    c.B_r = (v.array().cube() * (1.0 - v.array())).sum() / nn;
    c.N1 = ((1.0 - v.array()) / v.array()).sum() / nn;
    c.N0 = (v.array() / (1.0 - v.array())).sum() / nn;
    if (r.is_rank1()) {
        const Vector& nu = r.nu();
        const double n = static_cast<double>(nu.size());
        c.m2 = nu.array().square().sum() / n;
        c.m3 = nu.array().cube().sum() / n;
        c.m4 = nu.array().square().square().sum() / n;
        c.K_r = c.C_r * c.C_r / (2.0 * c.B_r);
    }
    return c;
}

ReferenceGraphon reflect(const ReferenceGraphon& r) {
    const Matrix& v = r.grid().values();
    return validate_reference(GridGraphon(Matrix::Ones(v.rows(), v.cols()) - v), r.eta());
}

}  // namespace ldp
