#include "mifb/rng.hpp"

#include "mifb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mifb {

namespace {
constexpr std::uint64_t kPcgMultiplier = 6364136223846793005ULL;
constexpr std::uint64_t kPcgStream = 0xda3e39cb94b95bdbULL;  // fixed stream selector
}  // namespace

RngState::RngState(std::uint64_t seed) : seed_(seed) {
  // pcg32_srandom_r with the fixed stream.
  inc_ = (kPcgStream << 1u) | 1u;
  state_ = 0u;
  next_u32();
  state_ += seed;
  next_u32();
}

std::uint32_t RngState::next_u32() {
  const std::uint64_t old = state_;
  state_ = old * kPcgMultiplier + inc_;
  const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  const auto rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
}

std::uint32_t RngState::next_below(std::uint32_t bound) {
  if (bound == 0) throw InvalidParameterError("next_below: bound must be >= 1");
  // Rejection sampling over the largest multiple of bound.
  const std::uint32_t threshold = (-bound) % bound;
  for (;;) {
    const std::uint32_t r = next_u32();
    if (r >= threshold) return r % bound;
  }
}

double RngState::next_uniform() {
  const std::uint64_t hi = next_u32();
  const std::uint64_t lo = next_u32();
  const std::uint64_t mantissa = (hi << 21) | (lo >> 11);  // 53 bits
  return static_cast<double>(mantissa) * 0x1.0p-53;
}

double RngState::next_gaussian() {
  const double u1 = 1.0 - next_uniform();  // (0, 1]
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vector gaussian_vector(RngState& state, Index n) {
  if (n < 1) throw InvalidParameterError("gaussian_vector: n must be >= 1");
  Vector out(n);
  for (Index i = 0; i < n; i += 2) {
    const double u1 = 1.0 - state.next_uniform();
    const double u2 = state.next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[i] = radius * std::cos(angle);
    if (i + 1 < n) out[i + 1] = radius * std::sin(angle);
  }
  return out;
}

Matrix gaussian_matrix(RngState& state, Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw InvalidParameterError("gaussian_matrix: empty shape");
  const Vector flat = gaussian_vector(state, rows * cols);
  return Eigen::Map<const Matrix>(flat.data(), rows, cols);
}

std::vector<Index> sample_without_replacement(RngState& state, Index n, Index k) {
  if (k > n) throw InvalidParameterError("sample_without_replacement: k > n");
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  // Partial Fisher-Yates: the first k entries become the sample.
  for (Index i = 0; i < k; ++i) {
    const Index j = i + static_cast<Index>(state.next_below(static_cast<std::uint32_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace mifb
