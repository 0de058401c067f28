// SPDX-License-Identifier: Apache-2.0
//
// Spike linear unit: for every encoded spike (c, l) the weight column w[:, c]
// is added into output column l. No multiplications, and channels without a
// spike at a token are never touched.

#pragma once

#include "sdt/counters.hpp"
#include "sdt/fixedpoint.hpp"
#include "sdt/neuron.hpp"
#include "sdt/spike_stream.hpp"

namespace sdt {

struct LinearWeights {
  FixedTensor w;     // [C_out, C_in]
  FixedTensor bias;  // [C_out], stored at w's scale (the accumulator scale)

  [[nodiscard]] std::size_t in_features() const { return w.dim(1); }
  [[nodiscard]] std::size_t out_features() const { return w.dim(0); }
  /// Throws std::invalid_argument on bad ranks, a bias scale that is not the
  /// accumulator scale, or a fan-in that could overflow the 32-bit
  /// accumulator.
  void validate() const;
};

/// out[t, o, l] = saturate(bias[o] + sum of w[o, c] over channels c that
/// spike at (t, l)), rescaled from the weight scale into out_fmt. The input
/// channels are split into `exec.threads` partitions whose partial sums are
/// reduced in a fixed order.
/// Counters: executed = accumulates = spikes * C_out; dense = T*C_in*L*C_out.
[[nodiscard]] FixedTensor spike_linear(const EncodedSpikeMap& map, const LinearWeights& weights,
                                       const FixedFormat& out_fmt, const Exec& exec = {});

/// spike_linear followed by the fused LIF encoder.
[[nodiscard]] EncodedSpikeMap spike_linear_into_neuron(const EncodedSpikeMap& map,
                                                       const LinearWeights& weights,
                                                       const FixedFormat& mem_fmt,
                                                       const LifParams& params,
                                                       int pos_width = kDefaultPosWidth,
                                                       const Exec& exec = {});

}  // namespace sdt
