// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ldp/expansion.hpp"
#include "ldp/families.hpp"
#include "ldp/graphon.hpp"
#include "ldp/montecarlo.hpp"
#include "ldp/optimizer.hpp"
#include "ldp/rate.hpp"
#include "ldp/spectral.hpp"
#include "oracles.hpp"

using namespace ldp;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Every optimizer run of the suite is recorded here and audited by criterion 8.
struct Run {
    const ReferenceGraphon* r;
    double beta;
    double beta_achieved;
    double psi;
};
std::vector<Run> g_runs;

void record(const ReferenceGraphon& r, double beta, double beta_achieved, double psi) {
    g_runs.push_back({&r, beta, beta_achieved, psi});
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

ReferenceGraphon constant_half(std::size_t n) {
    return validate_reference(GridGraphon::constant(n, 0.5), 0.5);
}

ReferenceGraphon rank1_poly(std::size_t n, std::vector<double> coeffs) {
    ReferenceSpec spec;
    spec.family = "rank1";
    spec.resolution = n;
    spec.nu_coefficients = std::move(coeffs);
    return build_reference(spec);
}

Matrix random_symmetric(Eigen::Index n, std::mt19937_64& gen, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = u(gen);
    return m;
}

// 1 -------------------------------------------------------------------------
Outcome constants_closed_form() {
    const auto c = reference_constants(constant_half(64));
    const double ln2 = std::log(2.0);
    double err = 0.0;
    err = std::max(err, std::abs(c.C_r - 0.5));
    err = std::max(err, std::abs(c.C0 - ln2));
    err = std::max(err, std::abs(c.C1 - ln2));
    err = std::max(err, std::abs(c.B_r - 0.0625));
    err = std::max(err, c.K_r ? std::abs(*c.K_r - 2.0) : 1.0);
    err = std::max(err, std::abs(c.N0 - 1.0));
    err = std::max(err, std::abs(c.N1 - 1.0));
    return {err <= 1e-12, fmt("max abs error %.3g", err)};
}

// 2 -------------------------------------------------------------------------
Outcome rank1_moments() {
    const auto r = rank1_poly(1024, {0.3, 0.4});
    const auto c = reference_constants(r);
    const double m2 = oracle::linear_moment(0.3, 0.4, 2);
    const double m3 = oracle::linear_moment(0.3, 0.4, 3);
    const double m4 = oracle::linear_moment(0.3, 0.4, 4);
    const bool exact_ok = std::abs(m2 - 79.0 / 300.0) < 1e-15 && std::abs(m3 - 0.145) < 1e-15 &&
                          std::abs(m4 - 0.08282) < 1e-15;
    const double em = std::max({std::abs(*c.m2 - m2), std::abs(*c.m3 - m3), std::abs(*c.m4 - m4)});
    const double ec = std::abs(c.C_r - *c.m2);
    return {exact_ok && em <= 1e-6 && ec <= 1e-9, fmt("moment error %.3g", em) + fmt(", |C_r - m2| %.3g", ec)};
}

// 3 -------------------------------------------------------------------------
Outcome expansion_equivalence() {
    std::mt19937_64 gen(3003);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Eigen::Index n = 64;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Vector nu(n);
        const double a = 0.4 + 0.2 * u(gen);
        const double b = 0.2 * u(gen);
        const double phase = 6.0 * u(gen);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            nu(i) = a + b * std::sin(3.0 * x + phase);
        }
        const auto r = make_rank1_reference(nu, nu.minCoeff() * nu.minCoeff());
        const double c_r = operator_norm(r.grid()).norm;
        Matrix d = random_symmetric(n, gen, -1.0, 1.0);
        d *= u(gen) * 0.1 * c_r / kernel_l2_norm(d);
        const GridGraphon h((r.grid().values() + d).cwiseMax(0.0).cwiseMin(1.0));
        const auto res = rank1_norm_fixedpoint(h, nu);
        worst = std::max(worst, std::abs(res.norm - operator_norm(h).norm));
    }

    // Finite rank: orthonormal polynomial bases at the midpoints.
    std::vector<Vector> basis;
    for (int deg = 0; deg < 3; ++deg) {
        std::vector<double> coeffs(static_cast<std::size_t>(deg) + 1, 0.0);
        coeffs.back() = 1.0;
        Vector v = polynomial_at_midpoints(coeffs, static_cast<std::size_t>(n));
        for (const auto& q : basis) v -= (v.dot(q) / static_cast<double>(n)) * q;
        v /= std::sqrt(v.squaredNorm() / static_cast<double>(n));
        basis.push_back(v);
    }
    const std::vector<std::vector<double>> theta_sets{{0.3, 0.1}, {0.4, 0.1, 0.05}};
    for (const auto& thetas : theta_sets) {
        const std::vector<Vector> nus(basis.begin(), basis.begin() + static_cast<long>(thetas.size()));
        Matrix hbar = Matrix::Zero(n, n);
        for (std::size_t k = 0; k < thetas.size(); ++k) hbar += thetas[k] * nus[k] * nus[k].transpose();
        for (int trial = 0; trial < 5; ++trial) {
            Matrix d = random_symmetric(n, gen, -1.0, 1.0);
            d *= 0.02 / kernel_l2_norm(d);
            const GridGraphon h((hbar + d).cwiseMax(0.0).cwiseMin(1.0));
            const auto res = finiterank_norm_fixedpoint(h, thetas, nus);
            worst = std::max(worst, std::abs(res.norm - operator_norm(h).norm));
        }
    }
    return {worst <= 1e-9, fmt("max |expansion - power iteration| %.3g", worst)};
}

// 4 and 5 share the probes.
struct CenterProbe {
    std::string name;
    ReferenceGraphon r;
    ScalingReport report;
};
std::vector<CenterProbe> g_center;

void run_center_probes() {
    if (!g_center.empty()) return;
    g_center.push_back({"constant 0.5", constant_half(128), {}});
    g_center.push_back({"nu = 0.3 + 0.4x", rank1_poly(128, {0.3, 0.4}), {}});
    for (auto& p : g_center) {
        p.report = scaling_probe(p.r, Regime::center, {0.02, 0.01, 0.005});
        for (const auto& row : p.report.rows) record(p.r, row.beta, row.beta_achieved, row.psi);
    }
}

Outcome center_scaling() {
    run_center_probes();
    bool ok = true;
    std::string detail;
    for (const auto& p : g_center) {
        const double k = *p.report.constants.K_r;
        for (const auto& row : p.report.rows) ok = ok && row.converged;
        for (const auto& ext : {p.report.ratio_extrapolated_upper, p.report.ratio_extrapolated_lower}) {
            if (!ext) {
                ok = false;
                continue;
            }
            const double rel = std::abs(*ext - 1.0);
            ok = ok && rel <= 0.10;
            detail += p.name + fmt(": psi/eps^2 -> %.5g K_r", *ext) + fmt(" (K_r = %.5g); ", k);
        }
    }
    return {ok, detail};
}

Outcome minimizer_direction() {
    run_center_probes();
    bool ok = true;
    std::string detail;
    for (const auto& p : g_center) {
        for (Side side : {Side::upper, Side::lower}) {
            std::vector<double> errs;
            for (const auto& row : p.report.rows) {
                if (row.side == side) errs.push_back(row.direction_error);
            }
            // errs ordered as eps = 0.02, 0.01, 0.005. When the exact error is zero (constant r)
            // both ends sit at the solver resolution kkt_tol / eps and no decrease is resolvable.
            const double kkt_tol = OptimizerOptions{}.kkt_tol;
            const bool at_001 = errs[1] <= 0.15;
            const bool decreasing = errs[2] < errs[0] || (errs[0] <= kkt_tol / 0.02 && errs[2] <= kkt_tol / 0.005);
            ok = ok && at_001 && decreasing;
            detail += p.name + (side == Side::upper ? " (+)" : " (-)") + fmt(": %.3g", errs[0]) +
                      fmt(" / %.3g", errs[1]) + fmt(" / %.3g; ", errs[2]);
        }
    }
    return {ok, detail};
}

// 6 -------------------------------------------------------------------------
Outcome endpoint_scaling() {
    static const ReferenceGraphon r = constant_half(64);
    static const ReferenceGraphon rhat = reflect(r);
    const auto right = scaling_probe(r, Regime::right_end, {0.01});
    const auto& row = right.rows.at(0);
    record(r, row.beta, row.beta_achieved, row.psi);
    const bool ratio_ok = row.converged && row.ratio >= 0.85 && row.ratio <= 1.15;

    const auto left = minimize_rate_at_norm(r, 0.01);
    const auto mirrored = minimize_rate_at_norm(rhat, 0.99);
    record(r, 0.01, left.beta_achieved, left.psi_value);
    record(rhat, 0.99, mirrored.beta_achieved, mirrored.psi_value);
    const double gap = std::abs(left.psi_value - mirrored.psi_value);
    const GridGraphon flipped(Matrix::Ones(64, 64) - left.h_beta.values());
    const double identity_gap = std::abs(rate_I(left.h_beta, r) - rate_I(flipped, rhat));
    return {ratio_ok && gap <= 1e-6 && identity_gap <= 1e-6,
            fmt("right-end ratio %.4f", row.ratio) + fmt(", reflection gap %.3g", gap) +
                fmt(", I_r(h) - I_rhat(1-h) %.3g", identity_gap)};
}

// 7 -------------------------------------------------------------------------
std::vector<ReferenceGraphon> g_small;

Outcome small_instance_oracle() {
    std::mt19937_64 gen(707);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    g_small.reserve(10);
    double worst = 0.0;
    bool converged = true;
    for (int trial = 0; trial < 10; ++trial) {
        Matrix v(2, 2);
        v(0, 0) = 0.15 + 0.7 * u(gen);
        v(1, 1) = 0.15 + 0.7 * u(gen);
        v(0, 1) = v(1, 0) = 0.15 + 0.7 * u(gen);
        g_small.push_back(validate_reference(GridGraphon(v), 0.15));
        const auto& r = g_small.back();
        const double beta = 0.1 + 0.8 * u(gen);
        OptimizerOptions opts;
        opts.random_starts = 8;
        opts.seed = static_cast<std::uint64_t>(trial);
        opts.throw_on_failure = false;
        const auto res = minimize_rate_at_norm(r, beta, opts);
        record(r, beta, res.beta_achieved, res.psi_value);
        converged = converged && res.converged;
        const double ref = oracle::grid_search_psi_2x2(v(0, 0), v(0, 1), v(1, 1), beta);
        worst = std::max(worst, std::abs(res.psi_value - ref));
    }
    return {converged && worst <= 1e-4, fmt("max |optimizer - grid search| %.3g", worst)};
}

// 8 -------------------------------------------------------------------------
Outcome bound_invariants() {
    int lower = 0;
    int upper = 0;
    for (const auto& run : g_runs) {
        const double c_r = operator_norm(run.r->grid()).norm;
        if (run.psi < 2.0 * (run.beta_achieved - c_r) * (run.beta_achieved - c_r)) ++lower;
        const double w = witness_upper_bound(*run.r, run.beta).value;
        if (run.psi > w + 1e-9) ++upper;
    }
    return {!g_runs.empty() && lower == 0 && upper == 0,
            std::to_string(g_runs.size()) + " runs, " + std::to_string(lower) + " lower and " +
                std::to_string(upper) + " upper violations"};
}

// 9 -------------------------------------------------------------------------
Outcome unbalanced_strictness() {
    std::mt19937_64 gen(909);
    const std::vector<ReferenceGraphon> refs{constant_half(16), rank1_poly(16, {0.3, 0.4}),
                                             rank1_poly(16, {0.5, 0.0, 0.3})};
    int violations = 0;
    int checked = 0;
    for (const auto& r : refs) {
        for (int m = 0; m < 20; ++m) {
            std::vector<std::vector<bool>> mask(16, std::vector<bool>(16, false));
            std::size_t on = 0;
            do {
                on = 0;
                for (std::size_t i = 0; i < 16; ++i)
                    for (std::size_t j = 0; j <= i; ++j) {
                        const bool b = (gen() & 1u) != 0;
                        mask[i][j] = mask[j][i] = b;
                    }
                for (const auto& row : mask)
                    for (bool b : row) on += b;
            } while (on == 0 || on == 256);
            const auto p = unbalanced_penalty_check(r, mask, 0.01);
            ++checked;
            if (!(p.K_masked > p.K_full)) ++violations;
        }
    }
    return {violations == 0, std::to_string(checked) + " masks, " + std::to_string(violations) + " violations"};
}

// 10 ------------------------------------------------------------------------
Outcome monte_carlo_concentration() {
    const auto r = validate_reference(GridGraphon::constant(1, 0.5), 0.5);
    const auto mid = spectral_sample_stats(r, 400, 50, 1010);
    const auto small = spectral_sample_stats(r, 200, 50, 1011);
    const auto large = spectral_sample_stats(r, 800, 50, 1012);
    const bool ok = std::abs(mid.q50 - 0.5) <= 0.03 && large.stddev < small.stddev;
    return {ok, fmt("median(n=400) %.5f", mid.q50) + fmt(", sd(n=200) %.3g", small.stddev) +
                    fmt(", sd(n=800) %.3g", large.stddev)};
}

// 11 ------------------------------------------------------------------------
Outcome gradient_check() {
    std::mt19937_64 gen(1111);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> nrm(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = validate_reference(GridGraphon(random_symmetric(8, gen, 0.1, 0.9)), 0.1);
        const double c_r = operator_norm(r.grid()).norm;
        const Side side = trial % 2 == 0 ? Side::upper : Side::lower;
        const double beta = side == Side::upper ? c_r + 0.2 * u(gen) * (1 - c_r) : c_r * (1 - 0.2 * u(gen));
        AugmentedLagrangian al(r, beta, side);
        al.set_multiplier(u(gen), 1.0 + 100.0 * u(gen));
        Vector z = al.pack(r.grid());
        for (Eigen::Index k = 0; k < z.size(); ++k) z(k) += 0.5 * nrm(gen);
        Vector g;
        al.evaluate(z, &g);
        Vector fd(z.size());
        for (Eigen::Index k = 0; k < z.size(); ++k) {
            const double h = 1e-5;
            Vector zp = z;
            Vector zm = z;
            zp(k) += h;
            zm(k) -= h;
            fd(k) = (al.evaluate(zp, nullptr) - al.evaluate(zm, nullptr)) / (2 * h);
        }
        worst = std::max(worst, (fd - g).norm() / g.norm());
    }
    return {worst <= 1e-5, fmt("max relative gradient error %.3g", worst)};
}

// 12 ------------------------------------------------------------------------
Outcome cut_norm_oracle() {
    std::mt19937_64 gen(1212);
    std::uniform_int_distribution<int> size(1, 10);
    std::uniform_int_distribution<int> level(0, 256);
    int mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = size(gen);
        Matrix a(n, n);
        Matrix b(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                a(i, j) = a(j, i) = level(gen) / 256.0;
                b(i, j) = b(j, i) = level(gen) / 256.0;
            }
        const double greedy = cut_norm_distance(GridGraphon(a), GridGraphon(b));
        const double brute = oracle::brute_cut_norm(a - b);
        if (greedy != brute) ++mismatches;
    }
    return {mismatches == 0, "50 pairs, " + std::to_string(mismatches) + " mismatches"};
}

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0: no runtime limit
    std::function<Outcome()> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "constants closed form", 1.0, constants_closed_form},
        {2, "rank-1 constants vs quadrature", 5.0, rank1_moments},
        {3, "expansion vs eigensolver", 30.0, expansion_equivalence},
        {4, "center scaling", 600.0, center_scaling},
        {5, "minimizer direction", 600.0, minimizer_direction},
        {6, "endpoint scaling and reflection", 300.0, endpoint_scaling},
        {7, "small-instance oracle", 600.0, small_instance_oracle},
        {8, "lower/upper bound invariant", 0.0, bound_invariants},
        {9, "unbalanced-perturbation strictness", 0.0, unbalanced_strictness},
        {10, "Monte Carlo concentration", 300.0, monte_carlo_concentration},
        {11, "gradient check", 60.0, gradient_check},
        {12, "cut-norm oracle", 60.0, cut_norm_oracle},
    };
    // Criteria 4 and 5 share one probe; its cost is charged to criterion 4.
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.body();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.limit_seconds == 0.0 || secs < c.limit_seconds;
        const bool pass = out.pass && in_time;
        if (!pass) ++failures;
        std::printf("[%s] %2d %-36s %8.2fs  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, out.detail.c_str(),
                    in_time ? "" : " (runtime limit exceeded)");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
