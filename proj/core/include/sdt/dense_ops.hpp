// SPDX-License-Identifier: Apache-2.0
//
// Dense fixed-point operators: the convolution front end, batch-norm folding
// and the residual adder.

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sdt/counters.hpp"
#include "sdt/fixedpoint.hpp"

namespace sdt {

struct ConvWeights {
  FixedTensor w;     // [C_out, C_in, K_h, K_w]
  FixedTensor bias;  // [C_out], at the accumulator scale (input scale + weight scale)
  std::size_t stride = 1;
  std::size_t padding = 0;

  [[nodiscard]] std::size_t out_channels() const { return w.dim(0); }
  [[nodiscard]] std::size_t in_channels() const { return w.dim(1); }
  [[nodiscard]] std::size_t out_size(std::size_t in, std::size_t k) const {
    return (in + 2 * padding - k) / stride + 1;
  }
};

/// Zero-padded cross-correlation per timestep of x [T, C_in, H, W]. Products
/// are summed in the 32-bit accumulator and saturated once into out_fmt.
/// Throws std::invalid_argument on shape mismatch, a bias that is not at the
/// accumulator scale, or a fan-in that could overflow the accumulator.
[[nodiscard]] FixedTensor conv2d(const FixedTensor& x, const ConvWeights& weights,
                                 const FixedFormat& out_fmt, const Exec& exec = {});

struct BatchNorm {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> mean;
  std::vector<double> var;
  double eps = 1e-5;

  /// gamma = 1, beta = 0, mean = 0, var = 1, eps = 0.
  static BatchNorm identity(std::size_t channels);
};

struct FoldedParams {
  std::vector<double> w;
  std::vector<double> bias;
};

/// Folds a per-output-channel batch norm into real-valued weights laid out
/// with the output channel as the slowest axis:
///   w' = w * gamma / sqrt(var + eps), bias' = (bias - mean) * gamma / sqrt(var + eps) + beta.
/// Throws std::invalid_argument if var + eps <= 0 or the sizes disagree.
[[nodiscard]] FoldedParams fold_bn(std::span<const double> w, std::span<const double> bias,
                                   const BatchNorm& bn);

/// Residual adder; same contract as add_elementwise.
[[nodiscard]] inline FixedTensor residual_add(const FixedTensor& a, const FixedTensor& b) {
  return add_elementwise(a, b);
}

}  // namespace sdt
