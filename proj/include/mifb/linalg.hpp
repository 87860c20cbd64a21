#pragma once

#include "mifb/types.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace mifb {

using LinearOp = std::function<Vector(const Vector&)>;

/// Full decomposition a = u * diag(sigma) * v^T restricted to the leading
/// min(rows, cols) singular values; u is rows x rows, v is cols x cols,
/// sigma is non-increasing and non-negative. Values below 1e-12 * sigma_max
/// are reported as computed, never clamped.
struct SvdResult {
  Matrix u;
  Vector sigma;
  Matrix v;

  Matrix reconstruct() const;
};

SvdResult svd(const Matrix& a);

/// Spectrum of a general (possibly nonsymmetric) square matrix.
std::vector<std::complex<double>> eigenvalues(const Matrix& m);

/// Power iteration estimate of the largest eigenvalue of a symmetric
/// positive semi-definite operator given by its action; relative error
/// <= tol. Throws ConvergenceError (carrying the best estimate) if the
/// iteration cap is hit first.
double largest_eigenvalue_sym(const LinearOp& apply, Index n, double tol);

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

}  // namespace mifb
