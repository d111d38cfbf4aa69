#pragma once

#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Dense>

namespace ldp::detail {

struct LbfgsOutcome {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool stopped = false;       ///< the stop predicate accepted the final point
    bool line_search_failed = false;
};

/// Limited-memory BFGS with Armijo backtracking. @p fg(x, grad) returns f(x) and fills grad;
/// @p stop() is queried after every accepted point (and at the start).
template <typename FG, typename Stop>
LbfgsOutcome lbfgs_minimize(FG&& fg, Eigen::VectorXd x, int memory, int max_iter, Stop&& stop) {
    using Eigen::VectorXd;
    LbfgsOutcome out;
    VectorXd g(x.size());
    double f = fg(x, g);
    std::deque<VectorXd> s_hist;
    std::deque<VectorXd> y_hist;
    std::deque<double> rho_hist;

    VectorXd d(x.size());
    VectorXd x_new(x.size());
    VectorXd g_new(x.size());
    std::vector<double> alpha(static_cast<std::size_t>(memory));

    for (int it = 0; it < max_iter; ++it) {
        if (stop()) {
            out.stopped = true;
            break;
        }
        // Two-loop recursion.
        d = -g;
        const int m = static_cast<int>(s_hist.size());
        for (int k = m - 1; k >= 0; --k) {
            const auto sk = static_cast<std::size_t>(k);
            alpha[sk] = rho_hist[sk] * s_hist[sk].dot(d);
            d -= alpha[sk] * y_hist[sk];
        }
        if (m > 0) {
            d *= 1.0 / (rho_hist.back() * y_hist.back().squaredNorm());
        } else {
            const double gmax = g.cwiseAbs().maxCoeff();
            if (gmax > 1.0) d /= gmax;
        }
        for (int k = 0; k < m; ++k) {
            const auto sk = static_cast<std::size_t>(k);
            const double beta = rho_hist[sk] * y_hist[sk].dot(d);
            d += (alpha[sk] - beta) * s_hist[sk];
        }
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            // Not a descent direction; reset memory and fall back to steepest descent.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = -g;
            slope = g.dot(d);
            if (!(slope < 0.0)) {
                out.stopped = stop();
                break;
            }
        }

        double step = 1.0;
        double f_new = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * d;
            f_new = fg(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // Restore the evaluation state at the current iterate.
            f = fg(x, g);
            out.line_search_failed = true;
            out.stopped = stop();
            break;
        }
        VectorXd s = x_new - x;
        VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-16 * s.norm() * y.norm()) {
            if (static_cast<int>(s_hist.size()) == memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
        }
        x.swap(x_new);
        g.swap(g_new);
        f = f_new;
        out.iterations = it + 1;
    }
    if (!out.stopped && !out.line_search_failed) out.stopped = stop();
    out.x = std::move(x);
    out.value = f;
    return out;
}

}  // namespace ldp::detail
