// SPDX-License-Identifier: Apache-2.0
//
// Leaky integrate-and-fire neurons in fixed point:
//
//   Mem[t]  = Spa[t] + Temp[t-1]
//   S[t]    = Mem[t] >= V_th
//   Temp[t] = S[t] ? V_reset : gamma * Mem[t]

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sdt/fixedpoint.hpp"
#include "sdt/spike_tensor.hpp"

namespace sdt {

/// Decay constant gamma = num / 2^shift, 0 <= gamma <= 1.
struct Decay {
  std::int32_t num = 1;
  int shift = 1;

  /// Exact conversion from a dyadic rational; throws std::invalid_argument
  /// if value is outside [0, 1] or needs more than 16 fractional bits.
  static Decay from_real(double value);
  [[nodiscard]] double value() const noexcept;
  void validate() const;

  friend bool operator==(const Decay&, const Decay&) = default;
};

struct LifParams {
  std::int32_t v_th = 0;
  std::int32_t v_reset = 0;
  Decay gamma{};

  /// Quantizes threshold and reset into the membrane format.
  static LifParams from_real(double v_th, double v_reset, double gamma, const FixedFormat& mem_fmt);
  void validate() const;

  friend bool operator==(const LifParams&, const LifParams&) = default;
};

struct LifState {
  FixedTensor temp_prev;
  std::size_t t = 0;

  /// State before the first timestep: Temp = 0 everywhere.
  static LifState fresh(std::vector<std::size_t> dims, const FixedFormat& mem_fmt);
};

struct NeuronUpdate {
  bool fired;
  std::int32_t temp;
};

/// Single-neuron update; `spa` and `temp_prev` are in mem_fmt.
[[nodiscard]] inline NeuronUpdate lif_update(std::int64_t spa, std::int32_t temp_prev,
                                             const LifParams& p, const FixedFormat& mem_fmt) {
  const std::int32_t mem = sat_narrow(spa + temp_prev, mem_fmt);
  if (mem >= p.v_th) return {true, p.v_reset};
  const auto decayed = shift_round(std::int64_t{p.gamma.num} * mem, p.gamma.shift);
  return {false, sat_narrow(decayed, mem_fmt)};
}

/// Advances every neuron by one timestep. Throws std::invalid_argument if
/// spa's dims or format disagree with the state.
[[nodiscard]] std::pair<SpikeTensor, LifState> lif_step(const LifState& state,
                                                        const FixedTensor& spa,
                                                        const LifParams& params);

/// Folds lif_step over the sequence from a fresh state.
[[nodiscard]] std::vector<SpikeTensor> lif_run(std::span<const FixedTensor> spa_sequence,
                                              const LifParams& params);

/// Splits a [T, ...] tensor into T tensors of the trailing dims.
[[nodiscard]] std::vector<FixedTensor> split_timesteps(const FixedTensor& x);

}  // namespace sdt
