#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace metaphor {

using Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Error taxonomy; the CLI maps these onto process exit codes.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniform draw in (0, 1] with exactly 53 random bits. mt19937_64 output is
// fully specified by the standard, so seeded streams agree across platforms
// (std::uniform_real_distribution does not give that guarantee).
inline double uniform01(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return u > 0.0 ? u : 0x1.0p-53;
}

// Compensated accumulator. Divergence costs are compared across iterations
// at 1e-10 slack, which plain summation error can approach on larger graphs.
template <typename Scalar>
class KahanSum {
 public:
  void add(Scalar value) {
    const Scalar y = value - compensation_;
    const Scalar t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }
  Scalar value() const { return sum_; }

 private:
  Scalar sum_ = 0;
  Scalar compensation_ = 0;
};

// FNV-1a 64-bit content hash for artifact validation.
class ContentHash {
 public:
  void update(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= bytes[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view text) { update(text.data(), text.size()); }
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hash_hex(std::string_view text);

// Levenshtein distance, used for "did you mean" hints on unknown nouns.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace metaphor
