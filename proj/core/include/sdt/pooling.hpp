// SPDX-License-Identifier: Apache-2.0
//
// Spike maxpooling. With binary inputs a window outputs 1 exactly when it
// covers at least one spike, so the encoded path walks the spikes and marks
// every window that covers each one. Overlapping windows share the spike.

#pragma once

#include <cstddef>

#include "sdt/counters.hpp"
#include "sdt/fixedpoint.hpp"
#include "sdt/spike_stream.hpp"
#include "sdt/spike_tensor.hpp"

namespace sdt {

struct PoolSpec {
  std::size_t kernel_h = 2;
  std::size_t kernel_w = 2;
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  std::size_t in_h = 0;
  std::size_t in_w = 0;

  [[nodiscard]] std::size_t out_h() const noexcept { return (in_h - kernel_h) / stride_h + 1; }
  [[nodiscard]] std::size_t out_w() const noexcept { return (in_w - kernel_w) / stride_w + 1; }
  [[nodiscard]] std::size_t windows() const noexcept { return out_h() * out_w(); }
  [[nodiscard]] std::size_t area() const noexcept { return kernel_h * kernel_w; }
  /// Throws std::invalid_argument on zero kernel/stride or a kernel larger
  /// than the input.
  void validate() const;

  friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

/// Encoded maxpool over a map with L = in_h * in_w. The output map has
/// L' = out_h * out_w and the given address width (defaults to the input's).
/// Counters: executed = accumulates = window marks; dense = T*C*windows*area.
[[nodiscard]] EncodedSpikeMap spike_maxpool(const EncodedSpikeMap& map, const PoolSpec& spec,
                                            int out_pos_width = 0, const Exec& exec = {});

/// Dense binary maxpool of [T, C, in_h, in_w] (or [T, C, in_h*in_w]) into
/// [T, C, out_h, out_w].
[[nodiscard]] SpikeTensor dense_maxpool(const SpikeTensor& x, const PoolSpec& spec);

/// Conventional maxpool over fixed-point values, same layout rules.
[[nodiscard]] FixedTensor dense_maxpool(const FixedTensor& x, const PoolSpec& spec);

}  // namespace sdt
