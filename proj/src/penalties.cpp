#include "mifb/penalties.hpp"

#include "mifb/errors.hpp"
#include "mifb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace mifb {

namespace {

Eigen::Map<const Matrix> as_matrix(const Vector& x, Index rows, Index cols) {
  return {x.data(), rows, cols};
}

Vector as_vector(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Index count_from_key(const std::string& key) {
  // "s:1;5;9" -> 3, "s:" -> 0, "r:5" -> 5.
  if (key.rfind("r:", 0) == 0) return static_cast<Index>(std::strtol(key.c_str() + 2, nullptr, 10));
  if (key.rfind("s:", 0) == 0) {
    if (key.size() == 2) return 0;
    return static_cast<Index>(std::count(key.begin(), key.end(), ';')) + 1;
  }
  throw InvalidParameterError("signature key does not match penalty: " + key);
}

}  // namespace

Vector Penalty::riemannian_hessian_action(const Vector&, const Vector&) const {
  return Vector::Zero(dimension());
}

// ---------------------------------------------------------------------------
// Stateless primitives
// ---------------------------------------------------------------------------

Vector prox_l0(const Vector& z, double theta) {
  if (theta <= 0) throw InvalidParameterError("prox_l0: theta must be > 0");
  const double threshold = std::sqrt(2.0 * theta);
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    // Tie at |z_i| == threshold resolves to 0, the lower-cardinality minimizer.
    out[i] = (std::abs(z[i]) > threshold) ? z[i] : 0.0;
  }
  return out;
}

Matrix prox_rank(const Matrix& z, double theta) {
  if (theta <= 0) throw InvalidParameterError("prox_rank: theta must be > 0");
  const double threshold = std::sqrt(2.0 * theta);
  const SvdResult dec = svd(z);
  Matrix out = Matrix::Zero(z.rows(), z.cols());
  for (Index i = 0; i < dec.sigma.size(); ++i) {
    if (dec.sigma[i] > threshold) {
      out.noalias() += dec.sigma[i] * dec.u.col(i) * dec.v.col(i).transpose();
    }
  }
  return out;
}

Index l0_value(const Vector& x) {
  Index count = 0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) ++count;
  }
  return count;
}

Index rank_value(const Matrix& x) {
  const SvdResult dec = svd(x);
  const double smax = dec.sigma.size() ? dec.sigma[0] : 0.0;
  if (smax == 0.0) return 0;
  const double threshold = 1e-10 * smax;
  Index r = 0;
  while (r < dec.sigma.size() && dec.sigma[r] > threshold) ++r;
  return r;
}

ManifoldInfo manifold_info_l0(const Vector& x) {
  std::vector<Index> supp;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) supp.push_back(i);
  }
  Matrix basis = Matrix::Zero(x.size(), static_cast<Index>(supp.size()));
  for (std::size_t j = 0; j < supp.size(); ++j) basis(supp[j], static_cast<Index>(j)) = 1.0;

  ManifoldInfo info;
  info.signature = ActivitySignature::support(supp);
  info.tangent_basis = std::move(basis);
  info.tangent_projector = [supp, n = x.size()](const Vector& v) {
    Vector out = Vector::Zero(n);
    for (Index i : supp) out[i] = v[i];
    return out;
  };
  return info;
}

ManifoldInfo manifold_info_rank(const Matrix& x) {
  const Index n1 = x.rows();
  const Index n2 = x.cols();
  const SvdResult dec = svd(x);
  const double smax = dec.sigma.size() ? dec.sigma[0] : 0.0;
  Index r = 0;
  if (smax > 0.0) {
    while (r < dec.sigma.size() && dec.sigma[r] > 1e-10 * smax) ++r;
  }

  const Matrix ur = dec.u.leftCols(r);
  const Matrix vr = dec.v.leftCols(r);

  // Tangent space of the fixed-rank manifold in the SVD frame: everything
  // except the trailing (n1-r) x (n2-r) block. Columns vec(u_i v_j^T) for
  // (i, j) with i < r or j < r form an orthonormal basis of dimension
  // r (n1 + n2 - r).
  Matrix basis(n1 * n2, r * (n1 + n2 - r));
  Index col = 0;
  for (Index j = 0; j < r; ++j) {
    for (Index i = 0; i < n1; ++i) {
      basis.col(col++) = as_vector(dec.u.col(i) * dec.v.col(j).transpose());
    }
  }
  for (Index i = 0; i < r; ++i) {
    for (Index j = r; j < n2; ++j) {
      basis.col(col++) = as_vector(dec.u.col(i) * dec.v.col(j).transpose());
    }
  }

  ManifoldInfo info;
  info.signature = ActivitySignature::rank(r);
  info.tangent_basis = std::move(basis);
  info.tangent_projector = [ur, vr, n1, n2](const Vector& zv) {
    const auto z = as_matrix(zv, n1, n2);
    const Matrix uz = ur * (ur.transpose() * z);
    const Matrix proj = uz + (z - uz) * vr * vr.transpose();
    return as_vector(proj);
  };
  return info;
}

// ---------------------------------------------------------------------------
// L0Penalty
// ---------------------------------------------------------------------------

L0Penalty::L0Penalty(Index n, double mu) : n_(n), mu_(mu) {
  if (n < 1) throw InvalidParameterError("L0Penalty: dimension must be >= 1");
  if (mu <= 0) throw InvalidParameterError("L0Penalty: mu must be > 0");
}

double L0Penalty::value(const Vector& x) const {
  return mu_ * static_cast<double>(l0_value(x));
}

double L0Penalty::value_from_signature(const ActivitySignature& sig) const {
  return mu_ * static_cast<double>(count_from_key(sig.key()));
}

Penalty::ProxResult L0Penalty::prox_with_signature(const Vector& z, double step) const {
  if (z.size() != n_) throw ShapeError("L0Penalty::prox: dimension mismatch");
  const double threshold = std::sqrt(2.0 * step * mu_);
  Vector out(n_);
  std::vector<Index> supp;
  for (Index i = 0; i < n_; ++i) {
    if (std::abs(z[i]) > threshold) {
      out[i] = z[i];
      supp.push_back(i);
    } else {
      out[i] = 0.0;
    }
  }
  return {std::move(out), ActivitySignature::support(supp)};
}

ActivitySignature L0Penalty::signature_of(const Vector& x) const {
  std::vector<Index> supp;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) supp.push_back(i);
  }
  return ActivitySignature::support(supp);
}

ManifoldInfo L0Penalty::manifold_at(const Vector& x) const {
  return manifold_info_l0(x);
}

// ---------------------------------------------------------------------------
// RankPenalty
// ---------------------------------------------------------------------------

RankPenalty::RankPenalty(Index rows, Index cols, double mu) : rows_(rows), cols_(cols), mu_(mu) {
  if (rows < 1 || cols < 1) throw InvalidParameterError("RankPenalty: empty shape");
  if (mu <= 0) throw InvalidParameterError("RankPenalty: mu must be > 0");
}

double RankPenalty::value(const Vector& x) const {
  return mu_ * static_cast<double>(rank_value(as_matrix(x, rows_, cols_)));
}

double RankPenalty::value_from_signature(const ActivitySignature& sig) const {
  return mu_ * static_cast<double>(count_from_key(sig.key()));
}

Penalty::ProxResult RankPenalty::prox_with_signature(const Vector& z, double step) const {
  if (z.size() != rows_ * cols_) throw ShapeError("RankPenalty::prox: dimension mismatch");
  const double threshold = std::sqrt(2.0 * step * mu_);
  const SvdResult dec = svd(as_matrix(z, rows_, cols_));
  Matrix out = Matrix::Zero(rows_, cols_);
  Index r = 0;
  for (Index i = 0; i < dec.sigma.size(); ++i) {
    if (dec.sigma[i] > threshold) {
      out.noalias() += dec.sigma[i] * dec.u.col(i) * dec.v.col(i).transpose();
      ++r;
    }
  }
  return {as_vector(out), ActivitySignature::rank(r)};
}

ActivitySignature RankPenalty::signature_of(const Vector& x) const {
  return ActivitySignature::rank(rank_value(as_matrix(x, rows_, cols_)));
}

ManifoldInfo RankPenalty::manifold_at(const Vector& x) const {
  return manifold_info_rank(as_matrix(x, rows_, cols_));
}

// ---------------------------------------------------------------------------
// ProductPenalty
// ---------------------------------------------------------------------------

ProductPenalty::ProductPenalty(std::vector<Part> parts, std::vector<Slice> free_slices,
                               Index dimension)
    : dim_(dimension) {
  for (auto& [penalty, slice] : parts) {
    if (!penalty) throw InvalidParameterError("ProductPenalty: null part");
    if (penalty->dimension() != slice.extent) {
      throw ShapeError("ProductPenalty: part dimension does not match its slice");
    }
    blocks_.push_back({std::move(penalty), slice});
  }
  for (const Slice& slice : free_slices) blocks_.push_back({nullptr, slice});

  std::sort(blocks_.begin(), blocks_.end(),
            [](const Block& a, const Block& b) { return a.slice.offset < b.slice.offset; });
  Index cursor = 0;
  for (const Block& block : blocks_) {
    if (block.slice.offset != cursor || block.slice.extent < 1) {
      throw PartitionError("ProductPenalty: slices must partition the coordinates");
    }
    cursor += block.slice.extent;
  }
  if (cursor != dim_) throw PartitionError("ProductPenalty: slices do not cover the dimension");
}

double ProductPenalty::value(const Vector& x) const {
  double total = 0.0;
  for (const Block& block : blocks_) {
    if (block.penalty) total += block.penalty->value(x.segment(block.slice.offset, block.slice.extent));
  }
  return total;
}

double ProductPenalty::value_from_signature(const ActivitySignature& sig) const {
  // Block keys are joined by '|' in block order.
  const std::string& key = sig.key();
  double total = 0.0;
  std::size_t pos = 0;
  for (const Block& block : blocks_) {
    const std::size_t end = key.find('|', pos);
    std::string token = key.substr(pos, end == std::string::npos ? end : end - pos);
    if (block.penalty) {
      total += block.penalty->value_from_signature(ActivitySignature::from_key(std::move(token)));
    }
    pos = (end == std::string::npos) ? key.size() : end + 1;
  }
  return total;
}

Penalty::ProxResult ProductPenalty::prox_with_signature(const Vector& z, double step) const {
  if (z.size() != dim_) throw ShapeError("ProductPenalty::prox: dimension mismatch");
  Vector out(dim_);
  std::vector<ActivitySignature> sigs;
  sigs.reserve(blocks_.size());
  for (const Block& block : blocks_) {
    const auto seg = z.segment(block.slice.offset, block.slice.extent);
    if (block.penalty) {
      auto res = block.penalty->prox_with_signature(seg, step);
      out.segment(block.slice.offset, block.slice.extent) = res.point;
      sigs.push_back(std::move(res.signature));
    } else {
      out.segment(block.slice.offset, block.slice.extent) = seg;
      sigs.push_back(ActivitySignature::free_block(block.slice.extent));
    }
  }
  return {std::move(out), ActivitySignature::product(sigs)};
}

ActivitySignature ProductPenalty::signature_of(const Vector& x) const {
  std::vector<ActivitySignature> sigs;
  sigs.reserve(blocks_.size());
  for (const Block& block : blocks_) {
    const auto seg = x.segment(block.slice.offset, block.slice.extent);
    if (block.penalty) {
      sigs.push_back(block.penalty->signature_of(seg));
    } else {
      sigs.push_back(ActivitySignature::free_block(block.slice.extent));
    }
  }
  return ActivitySignature::product(sigs);
}

ManifoldInfo ProductPenalty::manifold_at(const Vector& x) const {
  std::vector<ManifoldInfo> infos;
  std::vector<ActivitySignature> sigs;
  Index total_t = 0;
  for (const Block& block : blocks_) {
    if (block.penalty) {
      infos.push_back(block.penalty->manifold_at(x.segment(block.slice.offset, block.slice.extent)));
      total_t += infos.back().tangent_dim();
      sigs.push_back(infos.back().signature);
    } else {
      infos.push_back({});  // free block: full tangent space
      total_t += block.slice.extent;
      sigs.push_back(ActivitySignature::free_block(block.slice.extent));
    }
  }

  Matrix basis = Matrix::Zero(dim_, total_t);
  Index col = 0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const Slice slice = blocks_[b].slice;
    if (blocks_[b].penalty) {
      const Matrix& part = infos[b].tangent_basis;
      basis.block(slice.offset, col, slice.extent, part.cols()) = part;
      col += part.cols();
    } else {
      basis.block(slice.offset, col, slice.extent, slice.extent) =
          Matrix::Identity(slice.extent, slice.extent);
      col += slice.extent;
    }
  }

  std::vector<std::function<Vector(const Vector&)>> projectors;
  std::vector<Slice> slices;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    projectors.push_back(blocks_[b].penalty ? infos[b].tangent_projector : nullptr);
    slices.push_back(blocks_[b].slice);
  }

  ManifoldInfo info;
  info.signature = ActivitySignature::product(sigs);
  info.tangent_basis = std::move(basis);
  info.tangent_projector = [projectors, slices, dim = dim_](const Vector& v) {
    Vector out(dim);
    for (std::size_t b = 0; b < slices.size(); ++b) {
      const auto seg = v.segment(slices[b].offset, slices[b].extent);
      out.segment(slices[b].offset, slices[b].extent) = projectors[b] ? projectors[b](seg) : seg;
    }
    return out;
  };
  return info;
}

std::shared_ptr<const Penalty> free_penalty(Index dimension) {
  return std::make_shared<ProductPenalty>(std::vector<ProductPenalty::Part>{},
                                          std::vector<Slice>{{0, dimension}}, dimension);
}

}  // namespace mifb
