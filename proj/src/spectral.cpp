#include "ldp/spectral.hpp"

#include <cmath>
#include <cstdint>

#include "ldp/errors.hpp"

namespace ldp {

namespace {

double discrete_norm(const Vector& u) {
    return std::sqrt(u.squaredNorm() / static_cast<double>(u.size()));
}

// splitmix64; only used to build deterministic positive restart vectors.
std::uint64_t splitmix(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Vector positive_start(Eigen::Index n, int attempt) {
    Vector v(n);
    std::uint64_t state = 0xC0FFEEULL + static_cast<std::uint64_t>(attempt);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = 0.5 + static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53;
    }
    return v;
}

struct Attempt {
    SpectralResult result;
    bool converged = false;
};

Attempt power_iterate(const Matrix& kernel, double weight, Vector u, double tol, long max_iter) {
    Attempt a;
    const double n0 = discrete_norm(u);
    if (n0 == 0.0) throw DomainError("power iteration start vector is zero");
    u /= n0;
    Vector y(u.size());
    double mu = 0.0;
    double res = 0.0;
    long it = 0;
    for (; it < max_iter; ++it) {
        y.noalias() = kernel * u;
        y *= weight;
        mu = u.dot(y) / static_cast<double>(u.size());
        res = discrete_norm(y - mu * u);
        if (res <= tol) {
            a.converged = true;
            break;
        }
        const double ny = discrete_norm(y);
        if (ny == 0.0) {
            // u lies in the kernel; only possible for a zero operator restricted to span(u).
            mu = 0.0;
            res = 0.0;
            a.converged = true;
            break;
        }
        u = y / ny;
    }
    if (u.sum() < 0.0) u = -u;
    a.result.norm = mu;
    a.result.eigenfunction = std::move(u);
    a.result.iterations = it + (a.converged ? 1 : 0);
    a.result.residual = res;
    return a;
}

}  // namespace

Vector apply_operator(const Matrix& kernel, const Vector& u) {
    if (kernel.rows() != u.size() || kernel.cols() != u.size()) {
        throw DimensionMismatch("apply_operator: kernel is " + std::to_string(kernel.rows()) + "x" +
                                std::to_string(kernel.cols()) + ", vector has " + std::to_string(u.size()));
    }
    return (kernel * u) / static_cast<double>(u.size());
}

Vector apply_operator(const GridGraphon& h, const Vector& u) {
    return apply_operator(h.values(), u);
}

SpectralResult leading_eigenpair(const Matrix& kernel, double weight, const Vector& start,
                                 const PowerIterationOptions& opts) {
    if (!(opts.tol > 0.0)) throw DomainError("power iteration tolerance must be positive");
    if (kernel.rows() != start.size() || kernel.cols() != start.size()) {
        throw DimensionMismatch("leading_eigenpair: start vector length does not match kernel");
    }
    if (kernel.isZero(0.0)) {
        SpectralResult r;
        r.eigenfunction = start / discrete_norm(start);
        return r;
    }
    Attempt a = power_iterate(kernel, weight, start, opts.tol, opts.max_iter);
    long total = a.result.iterations;
    for (int k = 0; !a.converged && k < opts.restarts; ++k) {
        a = power_iterate(kernel, weight, positive_start(kernel.rows(), k), opts.tol, opts.max_iter);
        total += a.result.iterations;
    }
    if (!a.converged) throw NoConvergence(total, a.result.residual);
    a.result.iterations = total;
    return a.result;
}

SpectralResult operator_norm(const GridGraphon& h, double tol, long max_iter) {
    const auto n = static_cast<Eigen::Index>(h.resolution());
    PowerIterationOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return leading_eigenpair(h.values(), 1.0 / static_cast<double>(n), Vector::Ones(n), opts);
}

double signed_operator_norm(const Matrix& g, double tol, long max_iter) {
    const Eigen::Index n = g.rows();
    if (g.cols() != n) throw DimensionMismatch("signed_operator_norm: square matrix required");
    if (g.isZero(0.0)) return 0.0;
    const double w = 1.0 / static_cast<double>(n);
    // Power iteration on the positive semidefinite square (w g)^2; its Rayleigh
    // quotient increases monotonically to ||T_g||^2 even when +-lambda pairs occur.
    Vector u = positive_start(n, 0);
    u /= u.norm();
    double rho = 0.0;
    for (long it = 0; it < max_iter; ++it) {
        Vector y = w * (g * (w * (g * u)));
        const double next = u.dot(y);
        const double ny = y.norm();
        if (ny == 0.0) return 0.0;
        const double res = (y - next * u).norm();
        u = y / ny;
        if (res <= tol * tol || std::abs(next - rho) <= 1e-15 * next) {
            rho = next;
            return std::sqrt(std::max(rho, 0.0));
        }
        rho = next;
    }
    throw NoConvergence(max_iter, rho);
}

Matrix kernel_power(const Matrix& g, int n) {
    if (n < 1) throw DomainError("kernel_power: n must be >= 1");
    if (g.rows() != g.cols()) throw DimensionMismatch("kernel_power: square matrix required");
    const double w = 1.0 / static_cast<double>(g.rows());
    Matrix out = g;
    for (int k = 1; k < n; ++k) {
        out = w * (out * g);
    }
    return out;
}

double sandwich_form(const Vector& nu_left, const Matrix& g, int n, const Vector& nu_right) {
    if (n < 0) throw DomainError("sandwich_form: n must be >= 0");
    const Eigen::Index size = nu_left.size();
    if (nu_right.size() != size || g.rows() != size || g.cols() != size) {
        throw DimensionMismatch("sandwich_form: dimensions differ");
    }
    const double w = 1.0 / static_cast<double>(size);
    // Apply T_g n times to nu_right, then take the discrete inner product.
    Vector v = nu_right;
    for (int k = 0; k < n; ++k) {
        v = w * (g * v);
    }
    return w * nu_left.dot(v);
}

double spectral_gap(const Matrix& kernel) {
    const Eigen::Index n = kernel.rows();
    if (n < 2) return std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Matrix> es(kernel / static_cast<double>(n), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return ev(n - 1) - ev(n - 2);
}

}  // namespace ldp
