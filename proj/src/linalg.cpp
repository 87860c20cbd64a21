#include "mifb/linalg.hpp"

#include "mifb/errors.hpp"
#include "mifb/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace mifb {

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

Matrix SvdResult::reconstruct() const {
  const Index k = sigma.size();
  return u.leftCols(k) * sigma.asDiagonal() * v.leftCols(k).transpose();
}

SvdResult svd(const Matrix& a) {
  if (!all_finite(a)) throw InvalidParameterError("svd: input has non-finite entries");
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return SvdResult{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("eigenvalues: matrix is not square");
  if (!all_finite(m)) throw InvalidParameterError("eigenvalues: input has non-finite entries");
  Eigen::EigenSolver<Matrix> dec(m, /*computeEigenvectors=*/false);
  const auto& vals = dec.eigenvalues();
  return {vals.data(), vals.data() + vals.size()};
}

double largest_eigenvalue_sym(const LinearOp& apply, Index n, double tol) {
  if (n < 1) throw InvalidParameterError("largest_eigenvalue_sym: n must be >= 1");
  if (tol <= 0) throw InvalidParameterError("largest_eigenvalue_sym: tol must be > 0");

  // Deterministic generic start vector.
  RngState rng(0x5eedULL);
  Vector v = gaussian_vector(rng, n);
  v.normalize();

  constexpr long kMaxIter = 200000;
  double lambda = 0.0;
  for (long it = 0; it < kMaxIter; ++it) {
    Vector w = apply(v);
    const double wnorm = w.norm();
    if (wnorm == 0.0) return 0.0;  // operator annihilates the current iterate
    const double rayleigh = v.dot(w);
    const double resid = (w - rayleigh * v).norm();
    if (resid <= tol * std::max(std::abs(rayleigh), std::numeric_limits<double>::min())) {
      return rayleigh;
    }
    lambda = rayleigh;
    v = w / wnorm;
  }
  throw ConvergenceError("largest_eigenvalue_sym: power iteration did not converge", lambda);
}

}  // namespace mifb
