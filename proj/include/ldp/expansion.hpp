#pragma once

#include <vector>

#include "ldp/graphon.hpp"

namespace ldp {

/// Settings for the series fixed-point solvers.
struct ExpansionConfig {
    /// Number of series terms beyond n = 0; 0 selects it automatically from the tail bound.
    int truncation_order = 0;
    double fixed_point_tol = 1e-13;
    int max_sweeps = 1000;
    double damping = 0.5;
    /// Small-perturbation guard of the finite-rank solver, as a fraction of theta_1 - theta_2.
    double guard_fraction = 0.25;
};

struct ExpansionResult {
    double norm = 0.0;          ///< solution mu of the truncated fixed-point equation
    int truncation_order = 0;   ///< highest n kept
    int sweeps = 0;             ///< damped fixed-point updates performed
    double residual = 0.0;      ///< |mu - Phi(mu)| at return
    double tail_ratio = 0.0;    ///< ||g||_2 / mu_0
    double perturbation_norm = 0.0;  ///< ||T_g||
    double guard = 0.0;         ///< epsilon guard used (finite rank only)
    bool gershgorin_warning = false;
};

/// Operator norm of h from its expansion around the rank-1 kernel hbar = nu (x) nu:
/// mu = sum_n mu^{-n} F_n, F_n = <nu, T_g^n nu>, g = h - hbar.
/// Throws HypothesisViolated (||T_g|| >= ||T_h||), TailNotNegligible, NoConvergence.
ExpansionResult rank1_norm_fixedpoint(const GridGraphon& h, const Vector& hbar_nu, const ExpansionConfig& cfg = {});

/// Operator norm of h from its expansion around hbar = sum_k theta_k nu_k (x) nu_k,
/// mu = lambda_max(sum_n mu^{-n} F_n) with (F_n)_ij = sqrt(theta_i theta_j) <nu_i, T_g^n nu_j>.
/// The nus must be orthonormal under (1/N) sum u_i v_i and thetas strictly decreasing at the top.
ExpansionResult finiterank_norm_fixedpoint(const GridGraphon& h, const std::vector<double>& thetas,
                                           const std::vector<Vector>& nus, const ExpansionConfig& cfg = {});

}  // namespace ldp
