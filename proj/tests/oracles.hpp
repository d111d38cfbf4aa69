#pragma once

// Independent reference computations used only by the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace ldp::oracle {

/// Top eigenvalue of (1/N) a by a dense symmetric eigensolver.
inline double dense_top_eigenvalue(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a / static_cast<double>(a.rows()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(a.rows() - 1);
}

/// sup over row sets S and column sets T of |sum_{S x T} d| / N^2, by full enumeration.
inline double brute_cut_norm(const Eigen::MatrixXd& d) {
    const auto n = static_cast<unsigned>(d.rows());
    double best = 0.0;
    std::vector<double> col(n);
    for (std::uint32_t s = 0; s < (1u << n); ++s) {
        std::fill(col.begin(), col.end(), 0.0);
        for (unsigned i = 0; i < n; ++i) {
            if (!(s >> i & 1u)) continue;
            for (unsigned j = 0; j < n; ++j) col[j] += d(i, j);
        }
        for (std::uint32_t t = 0; t < (1u << n); ++t) {
            double sum = 0.0;
            for (unsigned j = 0; j < n; ++j) {
                if (t >> j & 1u) sum += col[j];
            }
            best = std::max(best, std::abs(sum));
        }
    }
    return best / (static_cast<double>(n) * n);
}

/// int_0^1 (a + b x)^k dx.
inline double linear_moment(double a, double b, int k) {
    return (std::pow(a + b, k + 1) - std::pow(a, k + 1)) / (b * (k + 1));
}

inline double relent(double a, double b) {
    double v = 0.0;
    if (a > 0) v += a * std::log(a / b);
    if (a < 1) v += (1 - a) * std::log((1 - a) / (1 - b));
    return v;
}

/// psi for a 2 x 2 block graphon by exhaustive search over the diagonal entries (a, c)
/// with the off-diagonal b solving the equality ||T_h|| = beta in closed form:
/// mu = ((a + c)/2 + sqrt(((a - c)/2)^2 + b^2)) / 2. Coarse grid of step 1e-3,
/// then successively finer local grids around the best point.
inline double grid_search_psi_2x2(double r11, double r12, double r22, double beta) {
    auto cost = [&](double a, double c) {
        const double s = 0.5 * (a + c);
        const double d = 0.5 * (a - c);
        const double t = 2.0 * beta - s;
        if (t < std::abs(d)) return std::numeric_limits<double>::infinity();
        const double b = std::sqrt(t * t - d * d);
        if (b > 1.0) return std::numeric_limits<double>::infinity();
        return 0.25 * (relent(a, r11) + relent(c, r22) + 2.0 * relent(b, r12));
    };
    double best = std::numeric_limits<double>::infinity();
    double ba = 0.0;
    double bc = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        for (int j = 0; j <= 1000; ++j) {
            const double a = i * 1e-3;
            const double c = j * 1e-3;
            const double v = cost(a, c);
            if (v < best) {
                best = v;
                ba = a;
                bc = c;
            }
        }
    }
    double step = 1e-3;
    for (int level = 0; level < 12; ++level) {
        const double ca = ba;
        const double cc = bc;
        for (int i = -20; i <= 20; ++i) {
            for (int j = -20; j <= 20; ++j) {
                const double a = std::clamp(ca + i * step / 10.0, 0.0, 1.0);
                const double c = std::clamp(cc + j * step / 10.0, 0.0, 1.0);
                const double v = cost(a, c);
                if (v < best) {
                    best = v;
                    ba = a;
                    bc = c;
                }
            }
        }
        step /= 10.0;
        if (step < 1e-14) break;
    }
    return best;
}

}  // namespace ldp::oracle
