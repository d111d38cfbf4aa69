#include "ldp/graphon.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ldp/errors.hpp"

namespace ldp {

GridGraphon::GridGraphon(Matrix values) : values_(std::move(values)) {
    const Eigen::Index n = values_.rows();
    if (n < 1 || values_.cols() != n) {
        throw DimensionMismatch("graphon values must be a nonempty square matrix");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = std::abs(values_(i, j) - values_(j, i));
            if (!(d <= kSymmetryTol)) {
                throw AsymmetryError(static_cast<std::size_t>(i), static_cast<std::size_t>(j), d);
            }
            const double mean = 0.5 * (values_(i, j) + values_(j, i));
            values_(i, j) = values_(j, i) = mean;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = values_(i, j);
            if (!(v >= 0.0 && v <= 1.0)) {
                throw RangeError(static_cast<std::size_t>(i), static_cast<std::size_t>(j), v);
            }
        }
    }
}

GridGraphon GridGraphon::constant(std::size_t n, double p) {
    const auto en = static_cast<Eigen::Index>(n);
    return GridGraphon(Matrix::Constant(en, en, p));
}

GridGraphon GridGraphon::from_kernel(std::size_t n, const std::function<double(double, double)>& kernel) {
    const auto en = static_cast<Eigen::Index>(n);
    Matrix v(en, en);
    for (Eigen::Index i = 0; i < en; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double y = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
            v(i, j) = v(j, i) = kernel(x, y);
        }
    }
    return GridGraphon(std::move(v));
}

ReferenceGraphon::ReferenceGraphon(GridGraphon grid, double eta, ReferenceStructure structure)
    : grid_(std::move(grid)), eta_(eta), structure_(std::move(structure)) {}

namespace {

void check_eta(const GridGraphon& grid, double eta) {
    if (!(eta > 0.0 && eta <= 0.5)) {
        throw DomainError("eta must lie in (0, 1/2]");
    }
    const Matrix& v = grid.values();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
            if (v(i, j) < eta || v(i, j) > 1.0 - eta) {
                throw EtaViolation(static_cast<std::size_t>(i), static_cast<std::size_t>(j), v(i, j), eta);
            }
        }
    }
}

}  // namespace

ReferenceGraphon validate_reference(const GridGraphon& grid, double eta) {
    check_eta(grid, eta);
    const Matrix& v = grid.values();
    const Eigen::Index n = v.rows();
    Vector nu = v.diagonal().array().sqrt();
    bool rank1 = true;
    for (Eigen::Index i = 0; i < n && rank1; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (std::abs(v(i, j) - nu(i) * nu(j)) > kSymmetryTol * v(i, j)) {
                rank1 = false;
                break;
            }
        }
    }
    if (rank1) {
        return ReferenceGraphon(grid, eta, Rank1Structure{std::move(nu)});
    }
    return ReferenceGraphon(grid, eta, GeneralStructure{});
}

ReferenceGraphon make_rank1_reference(const Vector& nu, double eta) {
    GridGraphon grid(nu * nu.transpose());
    check_eta(grid, eta);
    return ReferenceGraphon(std::move(grid), eta, Rank1Structure{nu});
}

ReferenceGraphon make_finite_rank_reference(std::vector<double> thetas, std::vector<Vector> nus, double eta) {
    if (thetas.empty() || thetas.size() != nus.size()) {
        throw DimensionMismatch("finite-rank reference needs as many thetas as vectors");
    }
    const Eigen::Index n = nus.front().size();
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        if (nus[k].size() != n) throw DimensionMismatch("finite-rank vectors differ in length");
        if (thetas[k] < 0.0) throw DomainError("thetas must be nonnegative");
        if (k > 0 && thetas[k] > thetas[k - 1]) throw DomainError("thetas must be non-increasing");
    }
    if (thetas.size() > 1 && !(thetas[0] > thetas[1])) {
        throw DomainError("theta_1 must strictly exceed theta_2");
    }
    for (std::size_t a = 0; a < nus.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            const double ip = nus[a].dot(nus[b]) / static_cast<double>(n);
            if (std::abs(ip - (a == b ? 1.0 : 0.0)) > 1e-10) {
                throw DomainError("finite-rank vectors are not orthonormal under (1/N) sum u_i v_i");
            }
        }
    }
    Matrix v = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        v.noalias() += thetas[k] * nus[k] * nus[k].transpose();
    }
    GridGraphon grid(std::move(v));
    check_eta(grid, eta);
    return ReferenceGraphon(std::move(grid), eta, FiniteRankStructure{std::move(thetas), std::move(nus)});
}

GridGraphon block_average(const GridGraphon& h, std::size_t m) {
    const std::size_t n = h.resolution();
    if (m == 0 || n % m != 0) {
        throw ResolutionMismatch("block_average: " + std::to_string(m) + " does not divide " + std::to_string(n));
    }
    const auto s = static_cast<Eigen::Index>(n / m);
    const auto em = static_cast<Eigen::Index>(m);
    Matrix out(em, em);
    for (Eigen::Index a = 0; a < em; ++a) {
        for (Eigen::Index b = 0; b < em; ++b) {
            out(a, b) = h.values().block(a * s, b * s, s, s).mean();
        }
    }
    return GridGraphon(std::move(out));
}

GridGraphon refine(const GridGraphon& h, std::size_t factor) {
    if (factor == 0) throw DomainError("refine: factor must be positive");
    const auto f = static_cast<Eigen::Index>(factor);
    const auto n = static_cast<Eigen::Index>(h.resolution());
    Matrix out(n * f, n * f);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            out.block(a * f, b * f, f, f).setConstant(h.values()(a, b));
        }
    }
    return GridGraphon(std::move(out));
}

namespace {

void require_same_resolution(const GridGraphon& a, const GridGraphon& b) {
    if (a.resolution() != b.resolution()) {
        throw ResolutionMismatch("resolutions differ: " + std::to_string(a.resolution()) + " vs " +
                                 std::to_string(b.resolution()));
    }
}

}  // namespace

double kernel_l2_norm(const Matrix& a) {
    return a.norm() / static_cast<double>(a.rows());
}

double l2_distance(const GridGraphon& h1, const GridGraphon& h2) {
    require_same_resolution(h1, h2);
    return kernel_l2_norm(h1.values() - h2.values());
}

double l1_distance(const GridGraphon& h1, const GridGraphon& h2) {
    require_same_resolution(h1, h2);
    const double n = static_cast<double>(h1.resolution());
    return (h1.values() - h2.values()).cwiseAbs().sum() / (n * n);
}

double cut_norm(const Matrix& diff) {
    const auto n = static_cast<std::size_t>(diff.rows());
    if (diff.cols() != diff.rows()) throw DimensionMismatch("cut_norm: square matrix required");
    if (n > kMaxExactCutResolution) throw TooLargeForExact(n);

    // Column marginals of the current row set, updated one row at a time in Gray-code order.
    Vector col = Vector::Zero(static_cast<Eigen::Index>(n));
    double best = 0.0;
    const std::uint64_t count = std::uint64_t{1} << n;
    std::uint64_t gray = 0;
    for (std::uint64_t k = 1; k < count; ++k) {
        const std::uint64_t next = k ^ (k >> 1);
        const std::uint64_t flipped = next ^ gray;
        const auto row = static_cast<Eigen::Index>(std::countr_zero(flipped));
        if (next & flipped) {
            col += diff.row(row).transpose();
        } else {
            col -= diff.row(row).transpose();
        }
        gray = next;
        double pos = 0.0;
        double neg = 0.0;
        for (Eigen::Index j = 0; j < col.size(); ++j) {
            if (col(j) > 0.0) pos += col(j);
            else neg -= col(j);
        }
        best = std::max(best, std::max(pos, neg));
    }
    const double nn = static_cast<double>(n);
    return best / (nn * nn);
}

double cut_norm_distance(const GridGraphon& h1, const GridGraphon& h2) {
    require_same_resolution(h1, h2);
    return cut_norm(h1.values() - h2.values());
}

std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, end);
}

namespace {

double parse_double(std::string_view token, std::size_t line) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(line, "not a number: '" + std::string(token) + "'");
    }
    return v;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

GridGraphon read_grid(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::size_t n = 0;
    bool have_header = false;
    Matrix values;
    Eigen::Index row = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (!have_header) {
            if (tokens.size() != 1) throw ParseError(lineno, "header must hold a single integer N");
            long long parsed = 0;
            auto [ptr, ec] = std::from_chars(tokens[0].data(), tokens[0].data() + tokens[0].size(), parsed);
            if (ec != std::errc{} || ptr != tokens[0].data() + tokens[0].size() || parsed < 1) {
                throw ParseError(lineno, "invalid resolution '" + tokens[0] + "'");
            }
            n = static_cast<std::size_t>(parsed);
            values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            have_header = true;
            continue;
        }
        if (static_cast<std::size_t>(row) >= n) {
            throw ParseError(lineno, "more than " + std::to_string(n) + " rows");
        }
        if (tokens.size() != n) {
            throw ParseError(lineno, "expected " + std::to_string(n) + " values, got " + std::to_string(tokens.size()));
        }
        for (std::size_t j = 0; j < n; ++j) {
            values(row, static_cast<Eigen::Index>(j)) = parse_double(tokens[j], lineno);
        }
        ++row;
    }
    if (!have_header) throw ParseError(lineno, "missing header");
    if (static_cast<std::size_t>(row) != n) {
        throw ParseError(lineno, "expected " + std::to_string(n) + " rows, got " + std::to_string(row));
    }
    return GridGraphon(std::move(values));
}

void write_grid(const GridGraphon& h, std::ostream& out) {
    const std::size_t n = h.resolution();
    out << n << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j) out << ' ';
            out << format_double(h(i, j));
        }
        out << '\n';
    }
}

GridGraphon load_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open " + path.string());
    return read_grid(in);
}

void save_grid(const GridGraphon& h, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_grid(h, out);
}

}  // namespace ldp
