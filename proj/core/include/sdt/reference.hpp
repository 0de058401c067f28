// SPDX-License-Identifier: Apache-2.0
//
// Dense fixed-point reference for the encoded-spike engine. Every spike
// tensor here is a full binary map; no position lists are involved, so the
// results serve as ground truth for bit-exact differential checks.

#pragma once

#include "sdt/fixedpoint.hpp"
#include "sdt/linear.hpp"
#include "sdt/model.hpp"
#include "sdt/neuron.hpp"
#include "sdt/spike_tensor.hpp"

namespace sdt::reference {

/// out[t, o, l] = saturate(bias[o] + sum_c w[o, c] * x[t, c, l]).
[[nodiscard]] FixedTensor dense_linear(const SpikeTensor& x, const LinearWeights& weights,
                                       const FixedFormat& out_fmt);

/// LIF over a [T, C, ...] membrane tensor, one lif_step per timestep.
[[nodiscard]] SpikeTensor dense_lif(const FixedTensor& spa_t, const LifParams& params);

/// Per channel: mask = (sum_l q * k >= v_th_attn); out = v * mask.
[[nodiscard]] SpikeTensor dense_sdsa(const SpikeTensor& q, const SpikeTensor& k,
                                     const SpikeTensor& v, std::int64_t v_th_attn);

/// Spikes to values: 1 becomes quantize(1.0, fmt). Keeps the input dims.
[[nodiscard]] FixedTensor lift(const SpikeTensor& x, const FixedFormat& fmt);

/// All-dense model with the same quantization and tap names as run_model.
[[nodiscard]] FixedTensor run_model_dense(const FixedTensor& x, const ModelConfig& cfg,
                                          const ModelWeights& weights, TapList* taps = nullptr);

}  // namespace sdt::reference
