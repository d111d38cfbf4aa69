#pragma once

#include <cstddef>

#include "ldp/graphon.hpp"

namespace ldp {

/// Leading eigenpair of a graphon operator T_h, (T_h u)_i = (1/N) sum_j h_ij u_j.
struct SpectralResult {
    double norm = 0.0;     ///< mu = ||T_h||
    Vector eigenfunction;  ///< unit under <u, u> = (1/N) sum u_i^2, nonnegative for positive kernels
    long iterations = 0;
    double residual = 0.0;  ///< ||T_h u - mu u||_2 in the discrete L2 norm
};

struct PowerIterationOptions {
    double tol = 1e-12;
    long max_iter = 100000;
    int restarts = 3;
};

/// (T_h u)_i = (1/N) sum_j h_ij u_j. Throws DimensionMismatch.
Vector apply_operator(const GridGraphon& h, const Vector& u);
Vector apply_operator(const Matrix& kernel, const Vector& u);

/// Top eigenpair of (1/N) h by power iteration from the all-ones vector.
/// A zero kernel yields norm 0 and the normalized start vector.
/// Throws NoConvergence after the deterministic restarts are exhausted.
SpectralResult operator_norm(const GridGraphon& h, double tol = 1e-12, long max_iter = 100000);

/// Power iteration on a raw symmetric kernel with an explicit start vector (warm starts).
/// @p weight scales the matrix: the operator is weight * kernel.
SpectralResult leading_eigenpair(const Matrix& kernel, double weight, const Vector& start,
                                 const PowerIterationOptions& opts = {});

/// ||T_g|| for a signed symmetric kernel, i.e. the largest |eigenvalue| of (1/N) g.
double signed_operator_norm(const Matrix& g, double tol = 1e-12, long max_iter = 100000);

/// g^1 = g, g^n = (1/N) g^{n-1} g.
Matrix kernel_power(const Matrix& g, int n);

/// (1/N^2) sum_ij nu_left_i (g^n)_ij nu_right_j for n >= 1; for n = 0 the
/// identity kernel is used, giving (1/N) sum_i nu_left_i nu_right_i.
double sandwich_form(const Vector& nu_left, const Matrix& g, int n, const Vector& nu_right);

/// Distance between the two largest eigenvalues of (1/N) h, from a dense symmetric solve.
double spectral_gap(const Matrix& kernel);

}  // namespace ldp
