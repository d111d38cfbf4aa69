#include "ldp/expansion.hpp"

#include <cmath>

#include "ldp/errors.hpp"
#include "ldp/spectral.hpp"

namespace ldp {

namespace {

constexpr double kMaxTailRatio = 0.9;

void check_config(const ExpansionConfig& cfg) {
    if (cfg.truncation_order < 0) throw DomainError("truncation_order must be >= 0");
    if (!(cfg.fixed_point_tol > 0.0)) throw DomainError("fixed_point_tol must be positive");
    if (cfg.max_sweeps < 1) throw DomainError("max_sweeps must be >= 1");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw DomainError("damping must lie in (0, 1]");
}

// Smallest n_max with ratio^(n_max + 1) < tol / 10.
int auto_order(double ratio, double tol) {
    if (ratio <= 0.0) return 1;
    const double target = tol / 10.0;
    int n = 1;
    double p = ratio * ratio;
    while (p >= target && n < 100000) {
        p *= ratio;
        ++n;
    }
    return n;
}

template <typename Map>
void solve_fixed_point(double mu0, const Map& phi, const ExpansionConfig& cfg, ExpansionResult& out) {
    double mu = mu0;
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        const double next = phi(mu);
        const double res = std::abs(next - mu);
        if (res <= cfg.fixed_point_tol) {
            out.norm = mu;
            out.sweeps = sweep;
            out.residual = res;
            return;
        }
        mu += cfg.damping * (next - mu);
    }
    throw NoConvergence(cfg.max_sweeps, std::abs(phi(mu) - mu));
}

}  // namespace

ExpansionResult rank1_norm_fixedpoint(const GridGraphon& h, const Vector& hbar_nu, const ExpansionConfig& cfg) {
    check_config(cfg);
    const auto n = static_cast<Eigen::Index>(h.resolution());
    if (hbar_nu.size() != n) throw DimensionMismatch("rank1_norm_fixedpoint: nu length differs from resolution");
    const double w = 1.0 / static_cast<double>(n);

    const Matrix g = h.values() - hbar_nu * hbar_nu.transpose();
    ExpansionResult out;
    out.perturbation_norm = signed_operator_norm(g);
    const double norm_h = operator_norm(h).norm;
    if (!(out.perturbation_norm < norm_h)) {
        throw HypothesisViolated("rank1_norm_fixedpoint: ||T_{h-hbar}|| = " + format_double(out.perturbation_norm) +
                                 " is not below ||T_h|| = " + format_double(norm_h));
    }

    const double f0 = w * hbar_nu.squaredNorm();
    out.tail_ratio = kernel_l2_norm(g) / f0;
    if (out.tail_ratio >= kMaxTailRatio) throw TailNotNegligible(out.tail_ratio);
    out.truncation_order =
        cfg.truncation_order > 0 ? cfg.truncation_order : auto_order(out.tail_ratio, cfg.fixed_point_tol);

    // F_n = <nu, T_g^n nu>, accumulated by repeated application of T_g.
    std::vector<double> f(static_cast<std::size_t>(out.truncation_order) + 1);
    Vector v = hbar_nu;
    f[0] = f0;
    for (int k = 1; k <= out.truncation_order; ++k) {
        v = w * (g * v);
        f[static_cast<std::size_t>(k)] = w * hbar_nu.dot(v);
    }

    auto phi = [&f](double mu) {
        // Horner in 1/mu.
        const double inv = 1.0 / mu;
        double acc = 0.0;
        for (auto it = f.rbegin(); it != f.rend(); ++it) acc = acc * inv + *it;
        return acc;
    };
    solve_fixed_point(f0, phi, cfg, out);
    return out;
}

ExpansionResult finiterank_norm_fixedpoint(const GridGraphon& h, const std::vector<double>& thetas,
                                           const std::vector<Vector>& nus, const ExpansionConfig& cfg) {
    check_config(cfg);
    const std::size_t k = thetas.size();
    if (k == 0 || nus.size() != k) throw DimensionMismatch("finiterank_norm_fixedpoint: thetas and nus differ in count");
    if (k > 8) throw DomainError("finiterank_norm_fixedpoint: rank above 8 is not supported");
    const auto n = static_cast<Eigen::Index>(h.resolution());
    const double w = 1.0 / static_cast<double>(n);
    for (const auto& nu : nus) {
        if (nu.size() != n) throw DimensionMismatch("finiterank_norm_fixedpoint: nu length differs from resolution");
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (thetas[i] < 0.0 || (i > 0 && thetas[i] > thetas[i - 1])) {
            throw DomainError("thetas must be nonnegative and non-increasing");
        }
    }
    if (k > 1 && !(thetas[0] > thetas[1])) throw DomainError("theta_1 must strictly exceed theta_2");

    Matrix hbar = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < k; ++i) hbar.noalias() += thetas[i] * nus[i] * nus[i].transpose();
    const Matrix g = h.values() - hbar;

    ExpansionResult out;
    out.guard = cfg.guard_fraction * (thetas[0] - (k > 1 ? thetas[1] : 0.0));
    out.perturbation_norm = signed_operator_norm(g);
    const double norm_h = operator_norm(h).norm;
    if (!(out.perturbation_norm < std::min(out.guard, norm_h))) {
        throw HypothesisViolated("finiterank_norm_fixedpoint: ||T_{h-hbar}|| = " + format_double(out.perturbation_norm) +
                                 " is not below min(guard = " + format_double(out.guard) +
                                 ", ||T_h|| = " + format_double(norm_h) + ")");
    }

    const double mu0 = thetas[0];
    out.tail_ratio = kernel_l2_norm(g) / mu0;
    if (out.tail_ratio >= kMaxTailRatio) throw TailNotNegligible(out.tail_ratio);
    out.truncation_order =
        cfg.truncation_order > 0 ? cfg.truncation_order : auto_order(out.tail_ratio, cfg.fixed_point_tol);

    const auto ek = static_cast<Eigen::Index>(k);
    std::vector<Matrix> terms(static_cast<std::size_t>(out.truncation_order) + 1, Matrix::Zero(ek, ek));
    std::vector<Vector> powered(nus);  // T_g^n nu_j
    for (int order = 0; order <= out.truncation_order; ++order) {
        if (order > 0) {
            for (auto& v : powered) v = w * (g * v);
        }
        Matrix& term = terms[static_cast<std::size_t>(order)];
        for (Eigen::Index i = 0; i < ek; ++i) {
            for (Eigen::Index j = 0; j < ek; ++j) {
                const auto si = static_cast<std::size_t>(i);
                const auto sj = static_cast<std::size_t>(j);
                term(i, j) = std::sqrt(thetas[si] * thetas[sj]) * w * nus[si].dot(powered[sj]);
            }
        }
        term = 0.5 * (term + term.transpose()).eval();
    }

    auto assemble = [&terms](double mu) {
        const double inv = 1.0 / mu;
        Matrix acc = terms.back();
        for (auto it = terms.rbegin() + 1; it != terms.rend(); ++it) acc = acc * inv + *it;
        return acc;
    };
    auto phi = [&assemble](double mu) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(assemble(mu), Eigen::EigenvaluesOnly);
        return es.eigenvalues().maxCoeff();
    };
    solve_fixed_point(mu0, phi, cfg, out);

    // Gershgorin diagnostic: the top disc should stay clear of the others.
    const Matrix m = assemble(out.norm);
    if (k > 1) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < ek; ++i) {
            off = std::max(off, m.row(i).cwiseAbs().sum() - std::abs(m(i, i)));
        }
        const double gap = m(0, 0) - m.diagonal().tail(ek - 1).maxCoeff();
        out.gershgorin_warning = !(2.0 * off < gap);
    }
    return out;
}

}  // namespace ldp
