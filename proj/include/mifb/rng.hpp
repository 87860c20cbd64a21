#pragma once

#include "mifb/types.hpp"

#include <cstdint>
#include <vector>

namespace mifb {

/// Deterministic random stream backed by PCG32 (O'Neill's pcg32_random_r,
/// 64-bit state / 32-bit output). The generator is fixed so that a recorded
/// seed reproduces every data set bit-for-bit; normal variates use
/// Box-Muller, not ziggurat, to keep the stream specifiable.
class RngState {
 public:
  explicit RngState(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint32_t next_u32();

  /// Unbiased draw from {0, 1, ..., bound-1}; bound >= 1.
  std::uint32_t next_below(std::uint32_t bound);

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double next_uniform();

  /// One standard normal (a Box-Muller pair is drawn, the sine leg dropped).
  double next_gaussian();

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  std::uint64_t inc_;
};

/// n i.i.d. standard normal samples. Pairs are drawn via Box-Muller; for odd
/// n the trailing sine leg is discarded so a call consumes ceil(n/2) pairs.
Vector gaussian_vector(RngState& state, Index n);

/// rows x cols matrix of standard normals, filled column by column.
Matrix gaussian_matrix(RngState& state, Index rows, Index cols);

/// k distinct indices drawn uniformly from {0, ..., n-1}, returned sorted.
std::vector<Index> sample_without_replacement(RngState& state, Index n, Index k);

}  // namespace mifb
