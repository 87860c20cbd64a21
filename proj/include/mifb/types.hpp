#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace mifb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Contiguous coordinate range [offset, offset + extent) of a stacked variable.
struct Slice {
  Index offset{0};
  Index extent{0};
};

/// Discrete activity descriptor of a point: the support set for the l0
/// penalty, the rank for the rank penalty, block-wise concatenation for
/// products. Two points lie on the same active manifold iff their
/// signatures compare equal.
class ActivitySignature {
 public:
  ActivitySignature() = default;

  static ActivitySignature support(const std::vector<Index>& indices);
  static ActivitySignature rank(Index r);
  static ActivitySignature free_block(Index extent);
  static ActivitySignature product(const std::vector<ActivitySignature>& parts);
  static ActivitySignature from_key(std::string key);

  const std::string& key() const { return key_; }
  bool empty() const { return key_.empty(); }

  friend bool operator==(const ActivitySignature&, const ActivitySignature&) = default;

 private:
  explicit ActivitySignature(std::string key) : key_(std::move(key)) {}
  std::string key_;
};

}  // namespace mifb
