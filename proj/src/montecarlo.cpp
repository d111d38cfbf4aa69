#include "ldp/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "ldp/errors.hpp"
#include "ldp/spectral.hpp"

namespace ldp {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return master ^ (0x9E3779B97F4A7C15ULL * index);
}

Matrix sample_graph(const ReferenceGraphon& r, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw DomainError("sample_graph: need at least 2 vertices");
    const std::size_t res = r.resolution();
    std::vector<Eigen::Index> block(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Exact integer ceil((i+1) * res / n), 1-based.
        const std::size_t b = ((i + 1) * res + n - 1) / n;
        block[i] = static_cast<Eigen::Index>(std::clamp<std::size_t>(b, 1, res) - 1);
    }
    std::mt19937_64 gen(seed);
    const Matrix& rv = r.grid().values();
    const auto en = static_cast<Eigen::Index>(n);
    Matrix a = Matrix::Zero(en, en);
    for (Eigen::Index i = 0; i < en; ++i) {
        for (Eigen::Index j = i + 1; j < en; ++j) {
            const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            if (u < rv(block[static_cast<std::size_t>(i)], block[static_cast<std::size_t>(j)])) {
                a(i, j) = a(j, i) = 1.0;
            }
        }
    }
    return a;
}

double max_eigenvalue(const Matrix& adjacency, double tol) {
    const Eigen::Index n = adjacency.rows();
    if (adjacency.cols() != n) throw DimensionMismatch("max_eigenvalue: square matrix required");
    if (adjacency.isZero(0.0)) return 0.0;
    PowerIterationOptions opts;
    opts.tol = tol;
    opts.max_iter = 20000;
    opts.restarts = 0;
    try {
        return leading_eigenpair(adjacency, 1.0, Vector::Ones(n), opts).norm;
    } catch (const NoConvergence&) {
        // Bipartite-like spectra (-lambda present) make plain iteration oscillate.
        const double shift = adjacency.rowwise().sum().maxCoeff();
        Matrix shifted = adjacency;
        shifted.diagonal().array() += shift;
        opts.max_iter = 200000;
        return leading_eigenpair(shifted, 1.0, Vector::Ones(n), opts).norm - shift;
    }
}

double quantile(std::vector<double> data, double q) {
    if (data.empty()) throw DomainError("quantile of empty data");
    std::sort(data.begin(), data.end());
    const double pos = q * static_cast<double>(data.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, data.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return data[lo] + frac * (data[hi] - data[lo]);
}

SampleStats spectral_sample_stats(const ReferenceGraphon& r, std::size_t n, std::size_t replicates,
                                  std::uint64_t seed, unsigned threads) {
    if (n < 2) throw DomainError("spectral_sample_stats: need at least 2 vertices");
    if (replicates < 1) throw DomainError("spectral_sample_stats: need at least 1 replicate");
    SampleStats s;
    s.n_vertices = n;
    s.replicates = replicates;
    s.seed = seed;
    s.derived_seeds.resize(replicates);
    s.values.resize(replicates);
    for (std::size_t i = 0; i < replicates; ++i) s.derived_seeds[i] = derive_seed(seed, i);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < replicates; i = next++) {
            try {
                const Matrix a = sample_graph(r, n, s.derived_seeds[i]);
                s.values[i] = max_eigenvalue(a) / static_cast<double>(n);
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::make_exception_ptr(Error("replicate " + std::to_string(i) + ": " + e.what()));
                }
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(replicates)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    const double count = static_cast<double>(replicates);
    s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / count;
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = replicates > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
    s.q05 = quantile(s.values, 0.05);
    s.q50 = quantile(s.values, 0.50);
    s.q95 = quantile(s.values, 0.95);
    return s;
}

}  // namespace ldp
