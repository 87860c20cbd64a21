#pragma once

#include "mifb/penalties.hpp"
#include "mifb/types.hpp"

#include <functional>
#include <memory>
#include <string>

namespace mifb {

/// Smooth loss F: value, gradient, optional Hessian action, and the
/// Lipschitz constant of the gradient.
struct SmoothSpec {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&, const Vector&)> hessian_action;  // may be empty
  double lipschitz{0.0};
  /// Distance from x to the nearest C^2 kink of F (squared hinge margins);
  /// empty for everywhere-C^2 losses.
  std::function<double(const Vector&)> smoothness_gap;
};

/// Composite objective Phi = R + F on a flat variable of fixed dimension.
struct CompositeProblem {
  SmoothSpec smooth;
  std::shared_ptr<const Penalty> penalty;
  Index dimension{0};
  std::uint64_t seed{0};
  std::string metadata;  // JSON: instance kind, dims, weights, noise, seed
  /// Reproducibility archive: metadata plus the dense instance arrays.
  std::shared_ptr<const std::string> archive;

  double objective(const Vector& x) const {
    return smooth.value(x) + penalty->value(x);
  }
};

enum class SvmLoss { SquaredHinge, Logistic };

/// min 0.5 ||y - A x||^2 + mu ||x||_0 with A m x n standard Gaussian,
/// x_ob k-sparse with amplitudes sign * (1 + |N(0,1)|), y = A x_ob + noise.
/// noise_std < 0 selects 0.01 * rms(A x_ob).
CompositeProblem make_sparse_regression(std::uint64_t seed, Index m, Index n, Index k,
                                        double noise_std, double mu);

/// Regression instance from explicit data (test hook bypassing the RNG).
CompositeProblem make_regression_from_data(const Matrix& a, const Vector& y, double mu);

/// min 0.5 ||y - x_s - x_l||_F^2 + mu1 ||x_s||_0 + mu2 rank(x_l) over the
/// stacked pair (vec(x_s), vec(x_l)). L = 2 exactly.
CompositeProblem make_pcp(std::uint64_t seed, Index n1, Index n2, Index sparsity, Index rank,
                          double noise_std, double mu1, double mu2);

/// min (1/m) sum G(<x, z_i> + b, y_i) + mu ||x||_0 over (b, x); b is
/// unpenalized. Labels come from a hidden Gaussian linear model.
CompositeProblem make_sparse_svm(std::uint64_t seed, Index m, Index n, SvmLoss loss, double mu);

/// Lipschitz constant of grad F: the closed form where known, else the
/// power-iteration largest eigenvalue of the Gram operator (rel. tol 1e-8).
double lipschitz_constant(const CompositeProblem& problem);

}  // namespace mifb
