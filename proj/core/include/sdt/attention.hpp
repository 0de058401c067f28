// SPDX-License-Identifier: Apache-2.0
//
// Spike-driven self-attention over encoded Q/K/V maps. Q ⊙ K summed over
// tokens is the size of the intersection of the two ascending address
// lists, so it is computed by a comparator walk instead of an L-wide
// product. The per-channel count is thresholded into a mask that keeps or
// clears each V channel.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sdt/counters.hpp"
#include "sdt/spike_stream.hpp"

namespace sdt {

class ChannelMask {
 public:
  ChannelMask() = default;
  ChannelMask(std::size_t timesteps, std::size_t channels, bool value = false)
      : timesteps_(timesteps), channels_(channels), bits_(timesteps * channels, value ? 1 : 0) {}

  [[nodiscard]] std::size_t timesteps() const noexcept { return timesteps_; }
  [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
  [[nodiscard]] bool get(std::size_t t, std::size_t c) const { return bits_.at(t * channels_ + c) != 0; }
  void set(std::size_t t, std::size_t c, bool v) { bits_.at(t * channels_ + c) = v ? 1 : 0; }
  [[nodiscard]] std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  friend bool operator==(const ChannelMask&, const ChannelMask&) = default;

 private:
  std::size_t timesteps_ = 0;
  std::size_t channels_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// |a ∩ b| by the comparator loop: equal addresses count and both advance,
/// otherwise the smaller side advances while the larger is held. Stops when
/// either list is exhausted. `steps`, if given, receives the comparison count.
[[nodiscard]] std::size_t intersect_count(std::span<const Position> a, std::span<const Position> b,
                                          std::size_t* steps = nullptr);

/// bits[t, c] = intersect_count(qs[t, c], ks[t, c]) >= v_th_attn.
/// Work is split into `n_heads` contiguous channel groups for scheduling
/// only; the result does not depend on it.
[[nodiscard]] ChannelMask sdsa_mask(const EncodedSpikeMap& qs, const EncodedSpikeMap& ks,
                                    std::int64_t v_th_attn, std::size_t n_heads = 1,
                                    const Exec& exec = {});

/// Keeps list (t, c) when the mask bit is set, clears it otherwise.
[[nodiscard]] EncodedSpikeMap apply_mask(const EncodedSpikeMap& vs, const ChannelMask& mask);

/// apply_mask(vs, sdsa_mask(qs, ks, v_th_attn)).
/// Counters: executed = comparator_steps; dense = T*C*L Hadamard products.
[[nodiscard]] EncodedSpikeMap sdsa(const EncodedSpikeMap& qs, const EncodedSpikeMap& ks,
                                   const EncodedSpikeMap& vs, std::int64_t v_th_attn,
                                   std::size_t n_heads = 1, const Exec& exec = {});

}  // namespace sdt
