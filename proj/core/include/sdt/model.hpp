// SPDX-License-Identifier: Apache-2.0
//
// Toy spike-driven transformer assembled from the encoded-spike operators.
//
//   SPS:  for each stage  conv -> LIF -> spike maxpool
//         then a relative-position conv kept as membrane potential, residual
//         added to the last stage's spikes and LIF-encoded into tokens.
//   SDEB: Q/K/V = linear -> LIF; mask-add attention; projection; residual;
//         LIF; MLP (linear -> LIF -> linear); residual; LIF.
//   Head: token and timestep mean of the final spikes, then a linear layer.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sdt/dense_ops.hpp"
#include "sdt/fixedpoint.hpp"
#include "sdt/linear.hpp"
#include "sdt/neuron.hpp"
#include "sdt/perf.hpp"
#include "sdt/pooling.hpp"
#include "sdt/spike_stream.hpp"

namespace sdt {

/// Address width used for the SPS core's internal spike maps, which are
/// larger than the token grid.
inline constexpr int kSpsPosWidth = 16;

/// Format of a spike lifted into a dense tensor (stored 0/1 at scale 1).
inline constexpr FixedFormat kBinaryFormat{2, 0, true};

struct ConvSpec {
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct SpsStage {
  ConvSpec conv;
  std::size_t pool_kernel = 2;
  std::size_t pool_stride = 2;

  friend bool operator==(const SpsStage&, const SpsStage&) = default;
};

struct ModelConfig {
  std::size_t timesteps = 4;
  std::size_t in_c = 3;
  std::size_t in_h = 32;
  std::size_t in_w = 32;
  std::vector<SpsStage> sps_stages;
  std::size_t rpe_kernel = 3;
  std::size_t embed_dim = 64;
  std::size_t n_blocks = 2;
  std::size_t n_heads = 4;
  std::size_t mlp_ratio = 4;
  std::size_t n_classes = 10;
  std::int64_t v_th_attn = 1;
  double v_th = 1.0;
  double v_reset = 0.0;
  double gamma = 0.5;
  int act_width = 10;
  int act_scale_exp = -6;
  int weight_width = 10;
  int pos_width = kDefaultPosWidth;

  /// 32x32x3 input, two SPS stages down to 8x8 tokens, D = 64, two blocks.
  static ModelConfig toy();

  [[nodiscard]] FixedFormat act_format() const { return FixedFormat{act_width, act_scale_exp, true}; }
  [[nodiscard]] LifParams lif() const { return LifParams::from_real(v_th, v_reset, gamma, act_format()); }

  struct StageGeometry {
    std::size_t in_c, in_h, in_w;     // conv input
    std::size_t conv_h, conv_w;       // conv output
    PoolSpec pool;
  };
  /// Per-stage shapes. Throws std::invalid_argument if a stage does not fit.
  [[nodiscard]] std::vector<StageGeometry> geometry() const;
  [[nodiscard]] std::size_t token_h() const;
  [[nodiscard]] std::size_t token_w() const;
  [[nodiscard]] std::size_t tokens() const { return token_h() * token_w(); }
  [[nodiscard]] std::size_t hidden_dim() const { return embed_dim * mlp_ratio; }

  /// Throws std::invalid_argument (or CapacityError for the token count).
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct BlockWeights {
  LinearWeights q, k, v, proj, mlp_up, mlp_down;
};

struct ModelWeights {
  std::vector<ConvWeights> sps;
  ConvWeights rpe;
  std::vector<BlockWeights> blocks;
  LinearWeights head;

  /// Throws std::invalid_argument when any shape disagrees with the config.
  void validate(const ModelConfig& cfg) const;
};

/// Named intermediate value recorded for differential diagnostics. Spike
/// layers are recorded decoded as 0/1, membrane layers as stored integers.
struct Tap {
  std::string name;
  std::vector<std::int32_t> values;
};
using TapList = std::vector<Tap>;

struct RunOptions {
  unsigned threads = 1;
  RunTrace* trace = nullptr;
  TapList* taps = nullptr;
  /// Receives the last block's output spikes when set.
  EncodedSpikeMap* final_tokens = nullptr;
};

/// x is [T, in_c, in_h, in_w] in the activation format. Returns tokens
/// [T, D, L].
[[nodiscard]] EncodedSpikeMap run_sps(const FixedTensor& x, const ModelConfig& cfg,
                                      const ModelWeights& weights, const RunOptions& opts = {});

[[nodiscard]] EncodedSpikeMap run_sdeb(const EncodedSpikeMap& tokens, const BlockWeights& block,
                                       const ModelConfig& cfg, const RunOptions& opts = {},
                                       const std::string& name = "block");

/// Logits [n_classes] at the head weight scale.
[[nodiscard]] FixedTensor run_model(const FixedTensor& x, const ModelConfig& cfg,
                                    const ModelWeights& weights, const RunOptions& opts = {});

/// Spikes to dense tensor in fmt: a spike becomes quantize(1.0, fmt).
[[nodiscard]] FixedTensor lift_spikes(const EncodedSpikeMap& map, const FixedFormat& fmt);

/// Classifier over per-(t, c) spike counts:
///   logit[k] = round((T*L*bias[k] + sum_t sum_c w[k, c] * count[t, c]) / (T*L)).
/// `counts` is [T, C] row-major.
[[nodiscard]] FixedTensor readout(std::span<const std::int64_t> counts, std::size_t timesteps,
                                  std::size_t tokens, const LinearWeights& head);

/// Integer division rounding half away from zero; d > 0.
[[nodiscard]] std::int64_t div_round(std::int64_t n, std::int64_t d);

}  // namespace sdt
