#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldp/graphon.hpp"

namespace ldp {

/// Identity of the generator behind sample_graph, recorded in output metadata.
inline constexpr const char* kGeneratorName = "std::mt19937_64 (uniform = bits >> 11 * 2^-53)";

/// Replicate seed derivation: master XOR (0x9E3779B97F4A7C15 * index), wrapping mod 2^64.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Symmetric 0/1 adjacency matrix, zero diagonal. Vertex i (1-based) sits at x = i/n and
/// reads block ceil(x R) of the reference (clamped to [1, R]). For i < j in row-major order
/// one uniform U is drawn and the edge is present iff U < r(i/n, j/n).
Matrix sample_graph(const ReferenceGraphon& r, std::size_t n, std::uint64_t seed);

/// Largest adjacency eigenvalue by power iteration (tolerance 1e-9); on failure retries
/// with the shifted matrix A + cI, c = max row sum.
double max_eigenvalue(const Matrix& adjacency, double tol = 1e-9);

struct SampleStats {
    std::size_t n_vertices = 0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> derived_seeds;
    std::vector<double> values;  ///< lambda_N / n per replicate, in replicate order
    double mean = 0.0;
    double stddev = 0.0;         ///< sample standard deviation (n - 1 denominator)
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
    std::string generator = kGeneratorName;
};

/// Samples @p replicates graphs with derived seeds and summarizes lambda_N / n.
/// Replicates may run on up to @p threads workers; results are ordered by index.
SampleStats spectral_sample_stats(const ReferenceGraphon& r, std::size_t n, std::size_t replicates,
                                  std::uint64_t seed, unsigned threads = 1);

/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::vector<double> data, double q);

}  // namespace ldp
