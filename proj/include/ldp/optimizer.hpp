#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ldp/errors.hpp"
#include "ldp/graphon.hpp"
#include "ldp/rate.hpp"

namespace ldp {

enum class Regime { center, right_end, left_end };

std::string to_string(Regime regime);
Regime parse_regime(const std::string& name);

/// Which one-sided problem is solved: ||T_h|| >= beta (upper) or ||T_h|| <= beta (lower).
enum class Side { upper, lower };

/// Closed-form optimal perturbation direction for one of the three regimes.
struct PerturbationField {
    Regime regime = Regime::center;
    Matrix delta;                       ///< signed symmetric N x N
    double normalization_constant = 0;  ///< B_r (center), N1 (right end) or N0 (left end)
};

/// center: (C_r/B_r) r^2 (1-r), rank-1 references only (RegimeUnavailable otherwise);
/// right_end: (1/N1) (1-r)/r; left_end: (1/N0) r/(1-r).
PerturbationField optimal_perturbation(const ReferenceGraphon& r, Regime regime);

struct OptimizerOptions {
    double constraint_tol = 1e-7;
    double kkt_tol = 1e-7;
    double rho_initial = 10.0;
    double rho_growth = 5.0;
    double rho_max = 1e12;
    int max_outer = 80;
    int max_inner = 5000;
    int lbfgs_memory = 12;
    double logit_cap = 40.0;
    double eig_tol = 1e-12;
    double gap_tol = 1e-10;
    /// Extra seeded random starts on top of {r, perturbation witness, constant beta}.
    int random_starts = 0;
    std::uint64_t seed = 0;
    /// Optional additional start (warm start along sweeps).
    std::optional<GridGraphon> warm_start;
    /// Only use the warm start (plus r) instead of the full multistart set.
    bool warm_start_only = false;
    /// Throw NotConverged instead of returning a flagged result.
    bool throw_on_failure = true;
};

struct OptimizationResult {
    GridGraphon h_beta = GridGraphon::constant(1, 0.0);
    double beta_target = 0.0;
    double beta_achieved = 0.0;
    double psi_value = 0.0;  ///< rate_I(h_beta, r), recomputed
    double lagrange_multiplier = 0.0;
    int iterations = 0;      ///< total inner L-BFGS iterations of the selected start
    int outer_iterations = 0;
    double kkt_residual = 0.0;
    bool converged = false;
    bool endpoint = false;   ///< beta in {0, 1}: value taken from the closed-form constants
    Side side = Side::upper;
    std::string start;       ///< label of the winning start
};

class NotConverged : public Error {
public:
    explicit NotConverged(OptimizationResult best);
    OptimizationResult best;
};

/// psi_r(beta) = inf { I_r(h) : ||T_h|| = beta } on the resolution of r, solved as the
/// active one-sided problem by an augmented Lagrangian in logit coordinates.
OptimizationResult minimize_rate_at_norm(const ReferenceGraphon& r, double beta, const OptimizerOptions& opts = {});

/// Feasible upper bound for psi_r(beta): the best of several monotone one-parameter
/// families through r (scaled perturbation fields clipped to [0, 1]) tuned by bisection
/// to reach norm beta.
struct Witness {
    GridGraphon h = GridGraphon::constant(1, 0.0);
    double value = 0.0;
    std::string family;
};
Witness witness_upper_bound(const ReferenceGraphon& r, double beta);

/// The augmented Lagrangian minimised in the inner loop, exposed for gradient checks.
/// Variables are the logits z_k of the upper-triangle entries (i <= j, row-major).
/// Value is N^2 [ I_r(sigma(z)) + A(c) ] with c = +-(||T_h|| - beta) and
/// A(c) = -lambda c + rho c^2 / 2 if rho c < lambda, else -lambda^2 / (2 rho).
class AugmentedLagrangian {
public:
    AugmentedLagrangian(const ReferenceGraphon& r, double beta, Side side, double logit_cap = 40.0,
                        double eig_tol = 1e-12);

    double evaluate(const Vector& z, Vector* grad);

    Vector pack(const GridGraphon& h) const;
    GridGraphon unpack(const Vector& z) const;
    std::size_t dimension() const noexcept { return index_.size(); }

    void set_multiplier(double lambda, double rho) { lambda_ = lambda; rho_ = rho; }
    double lambda() const noexcept { return lambda_; }
    double rho() const noexcept { return rho_; }

    /// State of the last evaluation.
    double last_norm() const noexcept { return last_mu_; }
    double last_constraint() const noexcept { return last_c_; }
    double last_rate() const noexcept { return last_rate_; }
    /// max_k |dI/dh - s lambda_eff u_i u_j| sigma'(z_k), the per-entry stationarity.
    double last_stationarity() const noexcept { return last_kkt_; }
    const Matrix& last_kernel() const noexcept { return kernel_; }

private:
    Matrix build_kernel(const Vector& z) const;

    const ReferenceGraphon& r_;
    double beta_;
    double sign_;
    double cap_;
    double eig_tol_;
    double lambda_ = 0.0;
    double rho_ = 10.0;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> index_;
    Vector ref_logit_;
    Vector ref_log_;
    Vector ref_log_c_;
    Vector weight_;
    Vector eigvec_;
    Matrix kernel_;
    double last_mu_ = 0.0;
    double last_c_ = 0.0;
    double last_rate_ = 0.0;
    double last_kkt_ = 0.0;
};

struct PsiRow {
    double beta = 0.0;
    double psi = 0.0;
    bool converged = false;
    double kkt_residual = 0.0;
    bool warmstart = false;
    double beta_achieved = 0.0;
    bool endpoint = false;
    /// l2 distance to the previous row's minimizer (NaN for the first row).
    double step_l2 = 0.0;
    std::string error;
};

struct PsiCurveOptions {
    OptimizerOptions optimizer;
    /// Serial sweep with warm starts (true) or independent cold starts run concurrently.
    bool warm_start = true;
    unsigned threads = 1;
};

/// Runs minimize_rate_at_norm per beta; never aborts, failures are recorded per row.
std::vector<PsiRow> psi_curve(const ReferenceGraphon& r, const std::vector<double>& betas,
                              const PsiCurveOptions& opts = {});

struct ScalingRow {
    double epsilon = 0.0;
    double beta = 0.0;
    Side side = Side::upper;
    double psi = 0.0;
    double beta_achieved = 0.0;
    double empirical = 0.0;
    double theory = 0.0;
    double ratio = 0.0;
    double direction_error = 0.0;
    bool converged = false;
    /// Empirical value extrapolated over resolutions {N/2, N} (second order), when requested.
    std::optional<double> empirical_resolution_extrapolated;
    std::string error;
};

struct ScalingReport {
    Regime regime = Regime::center;
    std::size_t resolution = 0;
    ReferenceConstants constants;
    std::vector<ScalingRow> rows;
    /// Ratio extrapolated to epsilon -> 0 per side (polynomial through all rows of that side).
    std::optional<double> ratio_extrapolated_upper;
    std::optional<double> ratio_extrapolated_lower;
};

struct ScalingOptions {
    OptimizerOptions optimizer;
    /// Also solve at resolution N/2 (block average of r) and extrapolate in N.
    bool resolution_extrapolation = false;
};

/// Compares psi near C_r, 1 or 0 with the closed-form scaling laws.
ScalingReport scaling_probe(const ReferenceGraphon& r, Regime regime, const std::vector<double>& epsilons,
                            const ScalingOptions& opts = {});

/// Value at 0 of the polynomial interpolating (x_i, y_i).
double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y);

struct UnbalancedPenalty {
    double K_masked = 0.0;
    double K_full = 0.0;
    double delta_masked = 0.0;  ///< K_masked eps^2
    double delta_full = 0.0;    ///< K_full eps^2
};

/// Curvature constant when the order-eps perturbation is confined to the blocks in @p mask:
/// C_r^2 / (2 int_mask r^3 (1-r)). Throws EmptyMask, RegimeUnavailable (non rank-1).
UnbalancedPenalty unbalanced_penalty_check(const ReferenceGraphon& r, const std::vector<std::vector<bool>>& mask,
                                           double eps);

/// B_r D_r^pi - (B_r^pi)^2 for the block relabelling pi (nonnegative, zero at the identity).
double balanced_identity_gap(const ReferenceGraphon& r, const std::vector<std::size_t>& permutation);

}  // namespace ldp
