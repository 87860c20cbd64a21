#pragma once

#include "mifb/types.hpp"

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace mifb {

/// Description of the active manifold at a point: discrete signature,
/// an orthonormal basis of the tangent space (dim x t) and the orthogonal
/// projector onto it.
struct ManifoldInfo {
  ActivitySignature signature;
  Matrix tangent_basis;
  std::function<Vector(const Vector&)> tangent_projector;

  Index tangent_dim() const { return tangent_basis.cols(); }
};

/// Non-smooth penalty R with proximal map and active-manifold descriptors.
/// Penalties act on flat vectors; matrix-valued blocks are stored
/// column-major. The weight mu is part of R, so prox(z, step) evaluates
/// prox_{step * R}(z).
class Penalty {
 public:
  struct ProxResult {
    Vector point;
    ActivitySignature signature;
  };

  virtual ~Penalty() = default;

  virtual Index dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual double value_from_signature(const ActivitySignature& sig) const = 0;

  virtual ProxResult prox_with_signature(const Vector& z, double step) const = 0;
  Vector prox(const Vector& z, double step) const { return prox_with_signature(z, step).point; }

  virtual ActivitySignature signature_of(const Vector& x) const = 0;
  virtual ManifoldInfo manifold_at(const Vector& x) const = 0;

  /// Riemannian Hessian of R along the active manifold at x, applied to a
  /// tangent vector. Identically zero for every built-in penalty (l0, rank,
  /// and their products).
  virtual Vector riemannian_hessian_action(const Vector& x, const Vector& h) const;
};

/// mu * ||x||_0 on R^n.
class L0Penalty : public Penalty {
 public:
  L0Penalty(Index n, double mu);

  Index dimension() const override { return n_; }
  double mu() const { return mu_; }
  double value(const Vector& x) const override;
  double value_from_signature(const ActivitySignature& sig) const override;
  ProxResult prox_with_signature(const Vector& z, double step) const override;
  ActivitySignature signature_of(const Vector& x) const override;
  ManifoldInfo manifold_at(const Vector& x) const override;

 private:
  Index n_;
  double mu_;
};

/// mu * rank(X) on rows x cols matrices, vectorized column-major.
class RankPenalty : public Penalty {
 public:
  RankPenalty(Index rows, Index cols, double mu);

  Index dimension() const override { return rows_ * cols_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  double mu() const { return mu_; }
  double value(const Vector& x) const override;
  double value_from_signature(const ActivitySignature& sig) const override;
  ProxResult prox_with_signature(const Vector& z, double step) const override;
  ActivitySignature signature_of(const Vector& x) const override;
  ManifoldInfo manifold_at(const Vector& x) const override;

 private:
  Index rows_, cols_;
  double mu_;
};

/// Blockwise sum of penalties over a partition of the coordinates; free
/// slices carry no penalty (prox is the identity there) and contribute full
/// blocks to the product manifold.
class ProductPenalty : public Penalty {
 public:
  using Part = std::pair<std::shared_ptr<const Penalty>, Slice>;

  ProductPenalty(std::vector<Part> parts, std::vector<Slice> free_slices, Index dimension);

  Index dimension() const override { return dim_; }
  double value(const Vector& x) const override;
  double value_from_signature(const ActivitySignature& sig) const override;
  ProxResult prox_with_signature(const Vector& z, double step) const override;
  ActivitySignature signature_of(const Vector& x) const override;
  ManifoldInfo manifold_at(const Vector& x) const override;

 private:
  struct Block {
    std::shared_ptr<const Penalty> penalty;  // null for free blocks
    Slice slice;
  };
  std::vector<Block> blocks_;  // ordered by offset, covering [0, dim)
  Index dim_;
};

/// No penalty at all: a product of a single free slice.
std::shared_ptr<const Penalty> free_penalty(Index dimension);

// Stateless prox / value primitives (theta is the full coefficient, i.e.
// prox_{theta * ||.||_0} has threshold sqrt(2 * theta)).
Vector prox_l0(const Vector& z, double theta);
Matrix prox_rank(const Matrix& z, double theta);
Index l0_value(const Vector& x);
Index rank_value(const Matrix& x);
ManifoldInfo manifold_info_l0(const Vector& x);
ManifoldInfo manifold_info_rank(const Matrix& x);

}  // namespace mifb
