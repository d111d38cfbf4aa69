#include "ldp/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "ldp/spectral.hpp"
#include "lbfgs.hpp"

namespace ldp {

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::center: return "center";
        case Regime::right_end: return "right_end";
        case Regime::left_end: return "left_end";
    }
    return "unknown";
}

Regime parse_regime(const std::string& name) {
    if (name == "center") return Regime::center;
    if (name == "right_end" || name == "right") return Regime::right_end;
    if (name == "left_end" || name == "left") return Regime::left_end;
    throw DomainError("unknown regime '" + name + "' (expected center, right_end or left_end)");
}

NotConverged::NotConverged(OptimizationResult b)
    : Error("NotConverged: beta = " + format_double(b.beta_target) + ", best psi = " + format_double(b.psi_value) +
            ", kkt_residual = " + format_double(b.kkt_residual)),
      best(std::move(b)) {}

// Perturbation fields -----------------------------------------------------

PerturbationField optimal_perturbation(const ReferenceGraphon& r, Regime regime) {
    const auto v = r.grid().values().array();
    const double nn = static_cast<double>(v.size());
    PerturbationField field;
    field.regime = regime;
    switch (regime) {
        case Regime::center: {
            if (!r.is_rank1()) {
                throw RegimeUnavailable("center perturbation requires a rank-1 reference");
            }
            const double c_r = operator_norm(r.grid()).norm;
            field.normalization_constant = (v.cube() * (1.0 - v)).sum() / nn;
            field.delta = (c_r / field.normalization_constant) * (v.square() * (1.0 - v)).matrix();
            break;
        }
        case Regime::right_end:
            field.normalization_constant = ((1.0 - v) / v).sum() / nn;
            field.delta = (((1.0 - v) / v) / field.normalization_constant).matrix();
            break;
        case Regime::left_end:
            field.normalization_constant = (v / (1.0 - v)).sum() / nn;
            field.delta = ((v / (1.0 - v)) / field.normalization_constant).matrix();
            break;
    }
    return field;
}

// Feasible witnesses ------------------------------------------------------

namespace {

struct Family {
    std::string name;
    std::function<Matrix(double)> make;
    double lo;
    double hi;
};

double norm_of(const Matrix& h) {
    const auto n = h.rows();
    return leading_eigenpair(h, 1.0 / static_cast<double>(n), Vector::Ones(n)).norm;
}

std::optional<Witness> tune_family(const Family& fam, const ReferenceGraphon& r, double beta) {
    double lo = fam.lo;
    double hi = fam.hi;
    double mu_lo = norm_of(fam.make(lo));
    double mu_hi = norm_of(fam.make(hi));
    if ((mu_lo - beta) * (mu_hi - beta) > 0.0) return std::nullopt;
    const bool increasing = mu_hi >= mu_lo;
    Matrix best = fam.make(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        Matrix h = fam.make(mid);
        const double mu = norm_of(h);
        if (std::abs(mu - beta) <= 1e-13 || mid == lo || mid == hi) {
            best = std::move(h);
            break;
        }
        if ((mu < beta) == increasing) lo = mid;
        else hi = mid;
        best = std::move(h);
    }
    Witness w;
    w.h = GridGraphon(best.cwiseMax(0.0).cwiseMin(1.0));
    w.value = rate_I(w.h, r);
    w.family = fam.name;
    return w;
}

double max_ratio(const Matrix& num, const Matrix& den) {
    double m = 0.0;
    for (Eigen::Index k = 0; k < num.size(); ++k) {
        if (den.data()[k] > 0.0) m = std::max(m, num.data()[k] / den.data()[k]);
    }
    return m;
}

std::vector<Family> witness_families(const ReferenceGraphon& r, bool upper) {
    const Matrix rv = r.grid().values();
    const Matrix ones = Matrix::Ones(rv.rows(), rv.cols());
    std::vector<Family> fams;
    if (upper) {
        fams.push_back({"toward_one", [rv, ones](double s) -> Matrix { return rv + s * (ones - rv); }, 0.0, 1.0});
        if (r.is_rank1()) {
            Matrix d = optimal_perturbation(r, Regime::center).delta;
            const double smax = max_ratio(ones - rv, d);
            fams.push_back({"center_field",
                            [rv, d](double s) -> Matrix { return (rv + s * d).cwiseMin(1.0); }, 0.0, smax});
        }
        Matrix d = optimal_perturbation(r, Regime::right_end).delta;
        const double smax = max_ratio(ones - rv, d);
        fams.push_back({"right_end_field",
                        [rv, ones, d](double s) -> Matrix { return (ones - s * d).cwiseMax(rv); }, 0.0, smax});
    } else {
        fams.push_back({"toward_zero", [rv](double s) -> Matrix { return (1.0 - s) * rv; }, 0.0, 1.0});
        if (r.is_rank1()) {
            Matrix d = optimal_perturbation(r, Regime::center).delta;
            const double smax = max_ratio(rv, d);
            fams.push_back({"center_field",
                            [rv, d](double s) -> Matrix { return (rv - s * d).cwiseMax(0.0); }, 0.0, smax});
        }
        Matrix d = optimal_perturbation(r, Regime::left_end).delta;
        const double smax = max_ratio(rv, d);
        fams.push_back({"left_end_field",
                        [rv, d](double s) -> Matrix { return (s * d).cwiseMin(rv); }, 0.0, smax});
    }
    return fams;
}

std::vector<Witness> all_witnesses(const ReferenceGraphon& r, double beta, bool upper) {
    std::vector<Witness> out;
    for (const auto& fam : witness_families(r, upper)) {
        if (auto w = tune_family(fam, r, beta)) out.push_back(std::move(*w));
    }
    return out;
}

}  // namespace

Witness witness_upper_bound(const ReferenceGraphon& r, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("witness_upper_bound: beta must lie in [0, 1]");
    const double c_r = operator_norm(r.grid()).norm;
    const auto ws = all_witnesses(r, beta, beta >= c_r);
    if (ws.empty()) throw Error("witness_upper_bound: no family reaches beta = " + format_double(beta));
    return *std::min_element(ws.begin(), ws.end(), [](const Witness& a, const Witness& b) { return a.value < b.value; });
}

// Augmented Lagrangian ----------------------------------------------------

namespace {

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double logistic(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double logit(double p) {
    return std::log(p) - std::log1p(-p);
}

}  // namespace

AugmentedLagrangian::AugmentedLagrangian(const ReferenceGraphon& r, double beta, Side side, double logit_cap,
                                         double eig_tol)
    : r_(r), beta_(beta), sign_(side == Side::upper ? 1.0 : -1.0), cap_(logit_cap), eig_tol_(eig_tol) {
    const auto n = static_cast<Eigen::Index>(r.resolution());
    index_.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) index_.emplace_back(i, j);
    }
    const auto m = static_cast<Eigen::Index>(index_.size());
    ref_logit_.resize(m);
    ref_log_.resize(m);
    ref_log_c_.resize(m);
    weight_.resize(m);
    const Matrix& rv = r.grid().values();
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto [i, j] = index_[static_cast<std::size_t>(k)];
        const double p = rv(i, j);
        ref_logit_(k) = logit(p);
        ref_log_(k) = std::log(p);
        ref_log_c_(k) = std::log1p(-p);
        weight_(k) = i == j ? 1.0 : 2.0;
    }
    eigvec_ = Vector::Ones(n);
    kernel_ = rv;
}

Vector AugmentedLagrangian::pack(const GridGraphon& h) const {
    const auto m = static_cast<Eigen::Index>(index_.size());
    Vector z(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto [i, j] = index_[static_cast<std::size_t>(k)];
        const double p = h.values()(i, j);
        const double zk = p <= 0.0 ? -cap_ : p >= 1.0 ? cap_ : logit(p);
        z(k) = std::clamp(zk, -cap_, cap_);
    }
    return z;
}

Matrix AugmentedLagrangian::build_kernel(const Vector& z) const {
    const auto n = static_cast<Eigen::Index>(r_.resolution());
    Matrix h(n, n);
    for (std::size_t k = 0; k < index_.size(); ++k) {
        const auto [i, j] = index_[k];
        h(i, j) = h(j, i) = logistic(std::clamp(z(static_cast<Eigen::Index>(k)), -cap_, cap_));
    }
    return h;
}

GridGraphon AugmentedLagrangian::unpack(const Vector& z) const {
    return GridGraphon(build_kernel(z));
}

double AugmentedLagrangian::evaluate(const Vector& z, Vector* grad) {
    const auto m = static_cast<Eigen::Index>(index_.size());
    const auto n = static_cast<Eigen::Index>(r_.resolution());
    const double nn = static_cast<double>(n * n);
    if (z.size() != m) throw DimensionMismatch("AugmentedLagrangian::evaluate: wrong variable count");

    kernel_ = build_kernel(z);
    PowerIterationOptions pio;
    pio.tol = eig_tol_;
    pio.max_iter = 20000;
    pio.restarts = 0;
    try {
        const SpectralResult sr = leading_eigenpair(kernel_, 1.0 / static_cast<double>(n), eigvec_, pio);
        eigvec_ = sr.eigenfunction;
        last_mu_ = sr.norm;
    } catch (const NoConvergence&) {
        // Nearly degenerate top of the spectrum (trial points far from the path); solve densely.
        Eigen::SelfAdjointEigenSolver<Matrix> es(kernel_ / static_cast<double>(n));
        last_mu_ = es.eigenvalues()(n - 1);
        eigvec_ = es.eigenvectors().col(n - 1) * std::sqrt(static_cast<double>(n));
        if (eigvec_.sum() < 0.0) eigvec_ = -eigvec_;
    }
    last_c_ = sign_ * (last_mu_ - beta_);

    const double active = lambda_ - rho_ * last_c_;
    double penalty = 0.0;
    double slope = 0.0;  // dA/dc
    if (active > 0.0) {
        penalty = -lambda_ * last_c_ + 0.5 * rho_ * last_c_ * last_c_;
        slope = -active;
    } else {
        penalty = -lambda_ * lambda_ / (2.0 * rho_);
    }

    double rate_sum = 0.0;
    double kkt = 0.0;
    if (grad) grad->resize(m);
    const Vector& u = eigvec_;
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto [i, j] = index_[static_cast<std::size_t>(k)];
        const double raw = z(k);
        const double zk = std::clamp(raw, -cap_, cap_);
        const double h = logistic(zk);
        const double hc = logistic(-zk);
        const double log_h = -softplus(-zk);
        const double log_hc = -softplus(zk);
        rate_sum += weight_(k) * (h * (log_h - ref_log_(k)) + hc * (log_hc - ref_log_c_(k)));
        const double dr = (zk - ref_logit_(k)) + slope * sign_ * u(i) * u(j);
        const double dsig = (raw == zk) ? h * hc : 0.0;
        kkt = std::max(kkt, std::abs(dr) * dsig);
        if (grad) (*grad)(k) = weight_(k) * dr * dsig;
    }
    last_rate_ = rate_sum / nn;
    last_kkt_ = kkt;
    return rate_sum + nn * penalty;
}

// Solver --------------------------------------------------------------------

namespace {

struct StartPoint {
    std::string label;
    GridGraphon h;
};

struct RunOutcome {
    OptimizationResult result;
    Vector z;
};

RunOutcome solve_from(const ReferenceGraphon& r, double beta, Side side, const StartPoint& start,
                      const OptimizerOptions& opts) {
    AugmentedLagrangian al(r, beta, side, opts.logit_cap, opts.eig_tol);
    Vector z = al.pack(start.h);
    double lambda = 0.0;
    double rho = opts.rho_initial;
    double prev_violation = std::numeric_limits<double>::infinity();
    int inner_total = 0;
    bool converged = false;
    double lambda_new = 0.0;
    int outer = 0;
    double kkt = std::numeric_limits<double>::infinity();
    const bool check_gap = r.resolution() <= 256;

    for (; outer < opts.max_outer; ++outer) {
        al.set_multiplier(lambda, rho);
        const double inner_tol = std::max(0.5 * opts.kkt_tol, std::min(1e-3, 0.1 * prev_violation));
        auto fg = [&al](const Vector& x, Vector& g) { return al.evaluate(x, &g); };
        auto stop = [&al, inner_tol] { return al.last_stationarity() <= inner_tol; };
        auto inner = detail::lbfgs_minimize(fg, z, opts.lbfgs_memory, opts.max_inner, stop);
        z = std::move(inner.x);
        inner_total += inner.iterations;

        const double c = al.last_constraint();
        lambda_new = std::max(0.0, lambda - rho * c);
        kkt = al.last_stationarity();
        const double violation = lambda_new > 0.0 ? std::abs(c) : std::max(0.0, -c);
        if (check_gap) {
            const double gap = spectral_gap(al.last_kernel());
            if (gap < opts.gap_tol) throw DegenerateEigenvalue(gap);
        }
        if (violation <= opts.constraint_tol && kkt <= opts.kkt_tol) {
            converged = true;
            lambda = lambda_new;
            ++outer;
            break;
        }
        if (violation > 0.25 * prev_violation) rho = std::min(rho * opts.rho_growth, opts.rho_max);
        prev_violation = violation;
        lambda = lambda_new;
        if (inner.line_search_failed && violation <= opts.constraint_tol) {
            // Stationarity is at the floating-point floor of the objective.
            break;
        }
    }

    RunOutcome out;
    out.z = z;
    OptimizationResult& res = out.result;
    res.h_beta = al.unpack(z);
    res.beta_target = beta;
    res.beta_achieved = operator_norm(res.h_beta).norm;
    res.psi_value = rate_I(res.h_beta, r);
    res.lagrange_multiplier = lambda;
    res.iterations = inner_total;
    res.outer_iterations = outer;
    res.kkt_residual = kkt;
    res.converged = converged && std::abs(res.beta_achieved - beta) <= opts.constraint_tol;
    res.side = side;
    res.start = start.label;
    return out;
}

Matrix random_logit_start(const ReferenceGraphon& r, std::uint64_t seed) {
    const Matrix& rv = r.grid().values();
    const Eigen::Index n = rv.rows();
    std::uint64_t state = seed ^ 0x5DEECE66DULL;
    auto next = [&state] {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
    };
    Matrix h(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            h(i, j) = h(j, i) = logistic(logit(rv(i, j)) + 2.0 * (next() - 0.5));
        }
    }
    return h;
}

bool better(const OptimizationResult& a, const OptimizationResult& b) {
    if (a.converged != b.converged) return a.converged;
    if (a.psi_value != b.psi_value) return a.psi_value < b.psi_value;
    return a.kkt_residual < b.kkt_residual;
}

}  // namespace

OptimizationResult minimize_rate_at_norm(const ReferenceGraphon& r, double beta, const OptimizerOptions& opts) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw DomainError("minimize_rate_at_norm: beta = " + format_double(beta) + " outside [0, 1]");
    }
    const std::size_t n = r.resolution();
    OptimizationResult res;
    res.beta_target = beta;
    if (beta == 0.0 || beta == 1.0) {
        const ReferenceConstants c = reference_constants(r);
        res.h_beta = GridGraphon::constant(n, beta);
        res.beta_achieved = beta;
        res.psi_value = beta == 0.0 ? c.C0 : c.C1;
        res.converged = true;
        res.endpoint = true;
        res.side = beta == 0.0 ? Side::lower : Side::upper;
        res.start = "endpoint";
        return res;
    }

    const double c_r = operator_norm(r.grid()).norm;
    if (std::abs(beta - c_r) <= opts.constraint_tol) {
        res.h_beta = r.grid();
        res.beta_achieved = c_r;
        res.psi_value = 0.0;
        res.converged = true;
        res.side = beta >= c_r ? Side::upper : Side::lower;
        res.start = "reference";
        return res;
    }
    const Side side = beta > c_r ? Side::upper : Side::lower;

    std::vector<StartPoint> starts;
    if (opts.warm_start) {
        if (opts.warm_start->resolution() != n) throw ResolutionMismatch("warm start resolution differs from r");
        starts.push_back({"warm_start", *opts.warm_start});
    }
    const auto witnesses = all_witnesses(r, beta, side == Side::upper);
    if (opts.warm_start && opts.warm_start_only) {
        if (!witnesses.empty()) {
            const auto best = std::min_element(witnesses.begin(), witnesses.end(),
                                               [](const Witness& a, const Witness& b) { return a.value < b.value; });
            starts.push_back({"witness:" + best->family, best->h});
        }
    } else {
        starts.push_back({"reference", r.grid()});
        for (const auto& w : witnesses) starts.push_back({"witness:" + w.family, w.h});
        starts.push_back({"constant_beta", GridGraphon::constant(n, beta)});
        for (int k = 0; k < opts.random_starts; ++k) {
            starts.push_back({"random:" + std::to_string(k),
                              GridGraphon(random_logit_start(r, opts.seed + static_cast<std::uint64_t>(k)))});
        }
    }

    std::optional<OptimizationResult> best;
    std::optional<DegenerateEigenvalue> degenerate;
    for (const auto& start : starts) {
        try {
            RunOutcome run = solve_from(r, beta, side, start, opts);
            if (!best || better(run.result, *best)) best = std::move(run.result);
        } catch (const DegenerateEigenvalue& e) {
            degenerate = e;
        }
    }
    if (!best) throw *degenerate;
    if (!best->converged && opts.throw_on_failure) throw NotConverged(*best);
    return *best;
}

// Sweeps ------------------------------------------------------------------

std::vector<PsiRow> psi_curve(const ReferenceGraphon& r, const std::vector<double>& betas, const PsiCurveOptions& opts) {
    std::vector<PsiRow> rows(betas.size());
    std::vector<std::optional<GridGraphon>> minimizers(betas.size());

    auto run_one = [&](std::size_t idx, const std::optional<GridGraphon>& warm) {
        PsiRow& row = rows[idx];
        row.beta = betas[idx];
        OptimizerOptions o = opts.optimizer;
        o.throw_on_failure = false;
        if (warm) {
            o.warm_start = warm;
            o.warm_start_only = true;
            row.warmstart = true;
        }
        try {
            OptimizationResult res = minimize_rate_at_norm(r, betas[idx], o);
            row.psi = res.psi_value;
            row.converged = res.converged;
            row.kkt_residual = res.kkt_residual;
            row.beta_achieved = res.beta_achieved;
            row.endpoint = res.endpoint;
            minimizers[idx] = std::move(res.h_beta);
        } catch (const std::exception& e) {
            row.converged = false;
            row.psi = std::numeric_limits<double>::quiet_NaN();
            row.error = e.what();
        }
    };

    if (opts.warm_start) {
        std::optional<GridGraphon> prev;
        for (std::size_t i = 0; i < betas.size(); ++i) {
            run_one(i, prev);
            if (minimizers[i]) prev = minimizers[i];
        }
    } else {
        const unsigned workers = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(betas.size())));
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < betas.size(); i = next++) run_one(i, std::nullopt);
        };
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].step_l2 = (i > 0 && minimizers[i] && minimizers[i - 1])
                              ? l2_distance(*minimizers[i], *minimizers[i - 1])
                              : std::numeric_limits<double>::quiet_NaN();
    }
    return rows;
}

double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) throw DimensionMismatch("extrapolate_to_zero: need matching nonempty inputs");
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double w = 1.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (j != i) w *= x[j] / (x[j] - x[i]);
        }
        total += w * y[i];
    }
    return total;
}

namespace {

void fill_scaling_row(ScalingRow& row, const ReferenceGraphon& r, Regime regime, const ReferenceConstants& c,
                      const PerturbationField& field, const OptimizerOptions& opts) {
    const double eps = row.epsilon;
    try {
        OptimizerOptions o = opts;
        o.throw_on_failure = false;
        const OptimizationResult res = minimize_rate_at_norm(r, row.beta, o);
        row.psi = res.psi_value;
        row.beta_achieved = res.beta_achieved;
        row.converged = res.converged;
        const Matrix& h = res.h_beta.values();
        const Matrix& rv = r.grid().values();
        switch (regime) {
            case Regime::center:
                row.empirical = res.psi_value / (eps * eps);
                row.theory = *c.K_r;
                row.direction_error = kernel_l2_norm(h - rv - (row.beta - c.C_r) * field.delta) / eps;
                break;
            case Regime::right_end:
                row.empirical = c.C1 - res.psi_value;
                row.theory = eps * (std::log(c.N1 / eps) + 1.0);
                row.direction_error = kernel_l2_norm(Matrix::Ones(h.rows(), h.cols()) - h - eps * field.delta) / eps;
                break;
            case Regime::left_end:
                row.empirical = c.C0 - res.psi_value;
                row.theory = eps * (std::log(c.N0 / eps) + 1.0);
                row.direction_error = kernel_l2_norm(h - eps * field.delta) / eps;
                break;
        }
        row.ratio = row.empirical / row.theory;
    } catch (const std::exception& e) {
        row.converged = false;
        row.error = e.what();
        row.ratio = std::numeric_limits<double>::quiet_NaN();
    }
}

std::vector<ScalingRow> scaling_rows(const ReferenceGraphon& r, Regime regime, const std::vector<double>& epsilons,
                                     const OptimizerOptions& opts, ReferenceConstants& constants) {
    constants = reference_constants(r);
    const PerturbationField field = optimal_perturbation(r, regime);
    std::vector<ScalingRow> rows;
    for (double eps : epsilons) {
        if (!(eps > 0.0 && eps < 1.0)) throw DomainError("scaling_probe: epsilons must lie in (0, 1)");
        std::vector<std::pair<double, Side>> targets;
        switch (regime) {
            case Regime::center:
                targets = {{constants.C_r + eps, Side::upper}, {constants.C_r - eps, Side::lower}};
                break;
            case Regime::right_end: targets = {{1.0 - eps, Side::upper}}; break;
            case Regime::left_end: targets = {{eps, Side::lower}}; break;
        }
        for (const auto& [beta, side] : targets) {
            ScalingRow row;
            row.epsilon = eps;
            row.beta = beta;
            row.side = side;
            fill_scaling_row(row, r, regime, constants, field, opts);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

ScalingReport scaling_probe(const ReferenceGraphon& r, Regime regime, const std::vector<double>& epsilons,
                            const ScalingOptions& opts) {
    if (epsilons.empty()) throw DomainError("scaling_probe: no epsilons given");
    if (regime == Regime::center && !r.is_rank1()) {
        throw RegimeUnavailable("center scaling requires a rank-1 reference");
    }
    ScalingReport report;
    report.regime = regime;
    report.resolution = r.resolution();
    report.rows = scaling_rows(r, regime, epsilons, opts.optimizer, report.constants);

    if (opts.resolution_extrapolation && r.resolution() % 2 == 0 && r.resolution() >= 2) {
        const ReferenceGraphon coarse = validate_reference(block_average(r.grid(), r.resolution() / 2), r.eta());
        ReferenceConstants coarse_constants;
        const auto coarse_rows = scaling_rows(coarse, regime, epsilons, opts.optimizer, coarse_constants);
        for (std::size_t i = 0; i < report.rows.size() && i < coarse_rows.size(); ++i) {
            if (report.rows[i].converged && coarse_rows[i].converged) {
                report.rows[i].empirical_resolution_extrapolated =
                    (4.0 * report.rows[i].empirical - coarse_rows[i].empirical) / 3.0;
            }
        }
    }

    for (Side side : {Side::upper, Side::lower}) {
        std::vector<double> xs;
        std::vector<double> ys;
        for (const auto& row : report.rows) {
            if (row.side == side && row.converged) {
                xs.push_back(row.epsilon);
                ys.push_back(row.ratio);
            }
        }
        if (xs.empty()) continue;
        const double value = extrapolate_to_zero(xs, ys);
        (side == Side::upper ? report.ratio_extrapolated_upper : report.ratio_extrapolated_lower) = value;
    }
    return report;
}

// Unbalanced perturbations --------------------------------------------------

UnbalancedPenalty unbalanced_penalty_check(const ReferenceGraphon& r, const std::vector<std::vector<bool>>& mask,
                                           double eps) {
    if (!r.is_rank1()) throw RegimeUnavailable("unbalanced_penalty_check requires a rank-1 reference");
    const std::size_t n = r.resolution();
    if (mask.size() != n) throw DimensionMismatch("mask must be N x N");
    const Matrix& v = r.grid().values();
    const double nn = static_cast<double>(n * n);
    double masked = 0.0;
    double full = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (mask[i].size() != n) throw DimensionMismatch("mask must be N x N");
        for (std::size_t j = 0; j < n; ++j) {
            if (mask[i][j] != mask[j][i]) throw DomainError("mask must be symmetric");
            const double p = v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const double b = p * p * p * (1.0 - p);
            full += b;
            if (mask[i][j]) {
                masked += b;
                ++count;
            }
        }
    }
    if (count == 0) throw EmptyMask();
    const double c_r = operator_norm(r.grid()).norm;
    UnbalancedPenalty out;
    out.K_full = c_r * c_r / (2.0 * full / nn);
    out.K_masked = c_r * c_r / (2.0 * masked / nn);
    out.delta_full = out.K_full * eps * eps;
    out.delta_masked = out.K_masked * eps * eps;
    return out;
}

double balanced_identity_gap(const ReferenceGraphon& r, const std::vector<std::size_t>& permutation) {
    const std::size_t n = r.resolution();
    if (permutation.size() != n) throw DimensionMismatch("permutation length differs from resolution");
    std::vector<bool> seen(n, false);
    for (std::size_t p : permutation) {
        if (p >= n || seen[p]) throw DomainError("not a permutation");
        seen[p] = true;
    }
    const Matrix& v = r.grid().values();
    const double nn = static_cast<double>(n * n);
    double b = 0.0;
    double b_pi = 0.0;
    double d_pi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double p = v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const double q = v(static_cast<Eigen::Index>(permutation[i]), static_cast<Eigen::Index>(permutation[j]));
            const double base = p * (1.0 - p);
            b += p * p * base;
            b_pi += q * p * base;
            d_pi += q * q * base;
        }
    }
    b /= nn;
    b_pi /= nn;
    d_pi /= nn;
    return b * d_pi - b_pi * b_pi;
}

}  // namespace ldp
