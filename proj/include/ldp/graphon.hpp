#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace ldp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerance for symmetry checks and rank-1 detection on input grids.
inline constexpr double kSymmetryTol = 1e-12;

/// Largest resolution accepted by the exhaustive cut-norm search.
inline constexpr std::size_t kMaxExactCutResolution = 22;

/// A block graphon: an N x N symmetric matrix of values in [0, 1], entry (i, j)
/// being the constant value taken on the block [i/N, (i+1)/N) x [j/N, (j+1)/N).
///
/// Instances are immutable once constructed. Construction validates symmetry
/// (up to kSymmetryTol, then symmetrizes exactly) and the [0, 1] range.
class GridGraphon {
public:
    /// Validates and takes ownership of @p values.
    explicit GridGraphon(Matrix values);

    static GridGraphon constant(std::size_t n, double p);

    /// Samples @p kernel at block midpoints ((i + 1/2)/N, (j + 1/2)/N).
    static GridGraphon from_kernel(std::size_t n, const std::function<double(double, double)>& kernel);

    std::size_t resolution() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    const Matrix& values() const noexcept { return values_; }
    double operator()(std::size_t i, std::size_t j) const {
        return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    friend bool operator==(const GridGraphon& a, const GridGraphon& b) {
        return a.values_.rows() == b.values_.rows() && a.values_ == b.values_;
    }

private:
    Matrix values_;
};

/// Reference graphon structure tags.
struct GeneralStructure {};

/// r(x, y) = nu(x) nu(y).
struct Rank1Structure {
    Vector nu;
};

/// r = sum_k theta_k nu_k (x) nu_k, with nus orthonormal under <u, v> = (1/N) sum u_i v_i.
struct FiniteRankStructure {
    std::vector<double> thetas;
    std::vector<Vector> nus;
};

using ReferenceStructure = std::variant<GeneralStructure, Rank1Structure, FiniteRankStructure>;

/// A graphon bounded in [eta, 1 - eta] together with optional low-rank structure.
class ReferenceGraphon {
public:
    ReferenceGraphon(GridGraphon grid, double eta, ReferenceStructure structure);

    const GridGraphon& grid() const noexcept { return grid_; }
    std::size_t resolution() const noexcept { return grid_.resolution(); }
    double eta() const noexcept { return eta_; }
    const ReferenceStructure& structure() const noexcept { return structure_; }

    bool is_rank1() const noexcept { return std::holds_alternative<Rank1Structure>(structure_); }
    const Vector& nu() const { return std::get<Rank1Structure>(structure_).nu; }

private:
    GridGraphon grid_;
    double eta_;
    ReferenceStructure structure_;
};

/// Checks the eta bounds and detects rank-1 structure (relative tolerance 1e-12).
/// Throws EtaViolation or DomainError (eta outside (0, 1/2]).
ReferenceGraphon validate_reference(const GridGraphon& grid, double eta);

/// Builds a rank-1 reference nu (x) nu. Throws EtaViolation if the product leaves [eta, 1 - eta].
ReferenceGraphon make_rank1_reference(const Vector& nu, double eta);

/// Builds sum_k theta_k nu_k (x) nu_k. Checks ordering of thetas and discrete orthonormality (1e-10).
ReferenceGraphon make_finite_rank_reference(std::vector<double> thetas, std::vector<Vector> nus, double eta);

/// Mean of @p h over each of the M x M coarse blocks. Requires M | N.
GridGraphon block_average(const GridGraphon& h, std::size_t m);

/// Piecewise-constant refinement: each block is split into factor x factor equal blocks.
GridGraphon refine(const GridGraphon& h, std::size_t factor);

/// Block-weighted norms of h1 - h2: sqrt((1/N^2) sum d^2) and (1/N^2) sum |d|.
double l2_distance(const GridGraphon& h1, const GridGraphon& h2);
double l1_distance(const GridGraphon& h1, const GridGraphon& h2);

/// Kernel L2 norm sqrt((1/N^2) sum a_ij^2) of a raw (possibly signed) matrix.
double kernel_l2_norm(const Matrix& a);

/// Cut distance restricted to unions of blocks, by exhaustive search over row
/// sets S (Gray-code order) with the best column set chosen greedily. N <= 22.
double cut_norm_distance(const GridGraphon& h1, const GridGraphon& h2);

/// Same search on a raw difference matrix.
double cut_norm(const Matrix& diff);

// Grid file IO. Line 1: N. Lines 2..N+1: N whitespace-separated values.
GridGraphon read_grid(std::istream& in);
void write_grid(const GridGraphon& h, std::ostream& out);
GridGraphon load_grid(const std::filesystem::path& path);
void save_grid(const GridGraphon& h, const std::filesystem::path& path);

/// Shortest round-trip-safe formatting with 17 significant digits, locale independent.
std::string format_double(double x);

}  // namespace ldp
