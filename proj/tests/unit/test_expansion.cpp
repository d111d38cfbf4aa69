#include <doctest.h>

#include <cmath>
#include <random>

#include "ldp/errors.hpp"
#include "ldp/expansion.hpp"
#include "ldp/families.hpp"
#include "ldp/optimizer.hpp"
#include "ldp/rate.hpp"
#include "ldp/spectral.hpp"
#include "oracles.hpp"

using namespace ldp;

namespace {

ReferenceGraphon linear_rank1(std::size_t n) {
    ReferenceSpec spec;
    spec.family = "rank1";
    spec.resolution = n;
    spec.nu_coefficients = {0.3, 0.4};
    return build_reference(spec);
}

// Orthonormal pair {1, sqrt(12)(x - 1/2)} at the block midpoints; the second is exactly
// orthogonal to the constant and normalised under the discrete inner product.
std::vector<Vector> legendre_pair(std::size_t n) {
    Vector one = Vector::Ones(static_cast<Eigen::Index>(n));
    Vector lin = polynomial_at_midpoints({-0.5, 1.0}, n);
    lin /= std::sqrt(lin.squaredNorm() / static_cast<double>(n));
    return {one, lin};
}

Matrix bump(std::size_t n) {
    return GridGraphon::from_kernel(n, [](double x, double y) {
               return std::exp(-20.0 * ((x - 0.3) * (x - 0.3) + (y - 0.3) * (y - 0.3)));
           }).values();
}

}  // namespace

TEST_SUITE("eig-expansion") {

TEST_CASE("rank one: unperturbed kernel returns m2 in one term") {
    const auto r = linear_rank1(64);
    const auto res = rank1_norm_fixedpoint(r.grid(), r.nu());
    const double m2 = r.nu().squaredNorm() / 64.0;
    CHECK(res.norm == doctest::Approx(m2).epsilon(1e-14));
    CHECK(res.perturbation_norm < 1e-12);
    CHECK(res.sweeps <= 1);
    CHECK(res.norm == doctest::Approx(oracle::dense_top_eigenvalue(r.grid().values())).epsilon(1e-12));
}

TEST_CASE("rank one: perturbation along the center field matches the power-iteration norm") {
    const auto r = linear_rank1(64);
    const auto field = optimal_perturbation(r, Regime::center);
    const GridGraphon h(r.grid().values() + 0.01 * field.delta);
    const auto res = rank1_norm_fixedpoint(h, r.nu());
    CHECK(std::abs(res.norm - operator_norm(h).norm) <= 1e-10);
    CHECK(std::abs(res.norm - oracle::dense_top_eigenvalue(h.values())) <= 1e-10);
    CHECK(res.sweeps <= 200);
}

TEST_CASE("rank one: random admissible perturbations agree with the dense oracle") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto r = linear_rank1(32);
    const ExpansionConfig cfg;
    for (int trial = 0; trial < 10; ++trial) {
        Matrix d(32, 32);
        for (int i = 0; i < 32; ++i)
            for (int j = 0; j <= i; ++j) d(i, j) = d(j, i) = u(gen);
        d *= 0.05 * 0.26 / (d.norm() / 32.0);
        const Matrix hv = (r.grid().values() + d).cwiseMax(0.0).cwiseMin(1.0);
        const GridGraphon h(hv);
        const auto res = rank1_norm_fixedpoint(h, r.nu(), cfg);
        CHECK(std::abs(res.norm - oracle::dense_top_eigenvalue(hv)) <= 10 * cfg.fixed_point_tol);
        CHECK(res.sweeps <= 200);
    }
}

TEST_CASE("rank one: hypothesis and tail errors") {
    const auto r = linear_rank1(16);
    // hbar far above h: the signed perturbation dominates.
    CHECK_THROWS_AS(rank1_norm_fixedpoint(GridGraphon::constant(16, 0.1), Vector::Constant(16, 0.6)),
                    HypothesisViolated);
    // Random-sign perturbation: small operator norm, large l2 norm.
    std::mt19937_64 gen(5);
    Matrix hv(64, 64);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j <= i; ++j) hv(i, j) = hv(j, i) = (gen() & 1u) ? 0.96 : 0.04;
    CHECK_THROWS_AS(rank1_norm_fixedpoint(GridGraphon(hv), Vector::Constant(64, std::sqrt(0.5))), TailNotNegligible);
    CHECK_THROWS_AS(rank1_norm_fixedpoint(r.grid(), Vector::Ones(8)), DimensionMismatch);
    ExpansionConfig bad;
    bad.max_sweeps = 1;
    const auto field = optimal_perturbation(r, Regime::center);
    CHECK_THROWS_AS(rank1_norm_fixedpoint(GridGraphon(r.grid().values() + 0.01 * field.delta), r.nu(), bad),
                    NoConvergence);
}

TEST_CASE("rank one: successive truncation corrections decay") {
    const auto r = linear_rank1(32);
    const auto field = optimal_perturbation(r, Regime::center);
    const GridGraphon h(r.grid().values() + 0.05 * field.delta);
    std::vector<double> mus;
    for (int order = 1; order <= 6; ++order) {
        ExpansionConfig cfg;
        cfg.truncation_order = order;
        mus.push_back(rank1_norm_fixedpoint(h, r.nu(), cfg).norm);
    }
    const auto res = rank1_norm_fixedpoint(h, r.nu());
    for (std::size_t i = 1; i + 1 < mus.size(); ++i) {
        const double now = std::abs(mus[i + 1] - mus[i]);
        const double bound = std::pow(res.tail_ratio, static_cast<double>(i + 2)) * (r.nu().squaredNorm() / 32.0);
        CHECK(now <= bound + 1e-15);
    }
    CHECK(std::abs(mus.back() - operator_norm(h).norm) < 1e-6);
}

TEST_CASE("finite rank: k = 1 reduces to the rank-one solver") {
    const auto r = linear_rank1(32);
    const auto field = optimal_perturbation(r, Regime::center);
    const GridGraphon h(r.grid().values() + 0.01 * field.delta);
    const double m2 = r.nu().squaredNorm() / 32.0;
    const Vector unit = r.nu() / std::sqrt(m2);
    ExpansionConfig cfg;
    cfg.guard_fraction = 1.0;
    const auto fr = finiterank_norm_fixedpoint(h, {m2}, {unit}, cfg);
    const auto r1 = rank1_norm_fixedpoint(h, r.nu(), cfg);
    CHECK(fr.norm == doctest::Approx(r1.norm).epsilon(1e-12));
}

TEST_CASE("finite rank: h equal to hbar") {
    const std::size_t n = 32;
    const auto nus = legendre_pair(n);
    const std::vector<double> thetas{0.3, 0.1};
    Matrix hbar = thetas[0] * nus[0] * nus[0].transpose() + thetas[1] * nus[1] * nus[1].transpose();
    const auto res = finiterank_norm_fixedpoint(GridGraphon(hbar), thetas, nus);
    CHECK(std::abs(res.norm - operator_norm(GridGraphon(hbar)).norm) < 1e-12);
    CHECK(res.norm == doctest::Approx(0.3).epsilon(1e-12));
    CHECK_FALSE(res.gershgorin_warning);
}

TEST_CASE("finite rank: k = 2 with a small bump against the power-iteration norm") {
    const std::size_t n = 64;
    const auto nus = legendre_pair(n);
    const std::vector<double> thetas{0.3, 0.1};
    Matrix hbar = thetas[0] * nus[0] * nus[0].transpose() + thetas[1] * nus[1] * nus[1].transpose();
    const GridGraphon h(hbar + 0.005 * bump(n));
    const auto res = finiterank_norm_fixedpoint(h, thetas, nus);
    CHECK(std::abs(res.norm - operator_norm(h).norm) <= 1e-9);
    CHECK(std::abs(res.norm - oracle::dense_top_eigenvalue(h.values())) <= 1e-9);
    CHECK(res.guard == doctest::Approx(0.05));
    CHECK(res.sweeps <= 200);
}

TEST_CASE("finite rank: k = 3 against the dense oracle") {
    const std::size_t n = 48;
    auto nus = legendre_pair(n);
    Vector quad = polynomial_at_midpoints({1.0 / 6.0, -1.0, 1.0}, n);
    for (const auto& v : nus) quad -= (quad.dot(v) / static_cast<double>(n)) * v;
    quad /= std::sqrt(quad.squaredNorm() / static_cast<double>(n));
    nus.push_back(quad);
    const std::vector<double> thetas{0.4, 0.1, 0.05};
    Matrix hbar = Matrix::Zero(48, 48);
    for (int i = 0; i < 3; ++i) hbar += thetas[static_cast<std::size_t>(i)] * nus[static_cast<std::size_t>(i)] *
                                        nus[static_cast<std::size_t>(i)].transpose();
    REQUIRE(hbar.minCoeff() >= 0.0);
    REQUIRE(hbar.maxCoeff() <= 1.0);
    const GridGraphon h(hbar + 0.01 * bump(n));
    const auto res = finiterank_norm_fixedpoint(h, thetas, nus);
    CHECK(std::abs(res.norm - oracle::dense_top_eigenvalue(h.values())) <= 1e-9);
}

TEST_CASE("finite rank: guard and input validation") {
    const std::size_t n = 32;
    const auto nus = legendre_pair(n);
    Matrix hbar = 0.3 * nus[0] * nus[0].transpose() + 0.1 * nus[1] * nus[1].transpose();
    CHECK_THROWS_AS(finiterank_norm_fixedpoint(GridGraphon(hbar + 0.3 * bump(n)), {0.3, 0.1}, nus),
                    HypothesisViolated);
    CHECK_THROWS_AS(finiterank_norm_fixedpoint(GridGraphon(hbar), {0.1, 0.3}, nus), DomainError);
    CHECK_THROWS_AS(finiterank_norm_fixedpoint(GridGraphon(hbar), {0.3}, nus), DimensionMismatch);
}

}  // TEST_SUITE
