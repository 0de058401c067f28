// SPDX-License-Identifier: Apache-2.0
//
// Seeded random models and inputs. Weights are drawn as reals, passed through
// a random batch norm that is folded in, and quantized per tensor with the
// finest scale that fits. Output depends only on the seed, not on the
// platform's <random> distributions.

#pragma once

#include <cstdint>

#include "sdt/fixedpoint.hpp"
#include "sdt/model.hpp"

namespace sdt {

/// SplitMix64; small, fast and fully specified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t state_;
};

struct GenOptions {
  /// Scales the weight spread relative to a unit-variance membrane.
  double gain = 1.5;
  /// Assumed firing rate of spike inputs when sizing weights.
  double input_rate = 0.2;
  double bias_lo = -0.1;
  double bias_hi = 0.5;
};

[[nodiscard]] ModelWeights random_weights(const ModelConfig& cfg, std::uint64_t seed,
                                          const GenOptions& opts = {});

/// Input image [T, C, H, W] in the activation format with values in [0, 1),
/// the same frame repeated at every timestep.
[[nodiscard]] FixedTensor random_input(const ModelConfig& cfg, std::uint64_t seed);

/// Quantizes real values with the finest scale at which max |v| fits `width`.
[[nodiscard]] FixedTensor quantize_tensor(std::vector<std::size_t> dims, std::span<const double> values,
                                          int width);

}  // namespace sdt
