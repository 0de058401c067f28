// SPDX-License-Identifier: Apache-2.0
//
// Encoded spike streams. Instead of a binary map, every (timestep, channel)
// keeps the ascending list of token addresses at which a spike fired, which
// is what the spike encoding array writes into the encoded-spike SRAM.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdt/counters.hpp"
#include "sdt/fixedpoint.hpp"
#include "sdt/neuron.hpp"
#include "sdt/spike_tensor.hpp"

namespace sdt {

using Position = std::uint16_t;

inline constexpr int kDefaultPosWidth = 8;
inline constexpr int kMaxPosWidth = 16;

/// Token addresses do not fit the configured address width.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EncodedSpikeMap {
 public:
  EncodedSpikeMap() = default;
  /// Empty map. Throws CapacityError if L > 2^pos_width and
  /// std::invalid_argument if pos_width is outside [1, 16].
  EncodedSpikeMap(std::size_t timesteps, std::size_t channels, std::size_t tokens,
                  int pos_width = kDefaultPosWidth);

  [[nodiscard]] std::size_t timesteps() const noexcept { return timesteps_; }
  [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
  [[nodiscard]] std::size_t tokens() const noexcept { return tokens_; }
  [[nodiscard]] int pos_width() const noexcept { return pos_width_; }

  [[nodiscard]] std::span<const Position> list(std::size_t t, std::size_t c) const {
    return lists_[index(t, c)];
  }

  /// Replaces the (t, c) list. Throws std::invalid_argument unless the
  /// positions are strictly increasing and below the token count.
  void assign(std::size_t t, std::size_t c, std::vector<Position> positions);
  void clear(std::size_t t, std::size_t c) { lists_[index(t, c)].clear(); }

  [[nodiscard]] std::size_t spike_count() const noexcept;
  [[nodiscard]] std::size_t slot_count() const noexcept { return timesteps_ * channels_ * tokens_; }
  [[nodiscard]] bool same_shape(const EncodedSpikeMap& o) const noexcept {
    return timesteps_ == o.timesteps_ && channels_ == o.channels_ && tokens_ == o.tokens_;
  }

  friend bool operator==(const EncodedSpikeMap&, const EncodedSpikeMap&) = default;

 private:
  [[nodiscard]] std::size_t index(std::size_t t, std::size_t c) const {
    if (t >= timesteps_ || c >= channels_) throw std::out_of_range("spike map index");
    return t * channels_ + c;
  }

  std::size_t timesteps_ = 0;
  std::size_t channels_ = 0;
  std::size_t tokens_ = 0;
  int pos_width_ = kDefaultPosWidth;
  std::vector<std::vector<Position>> lists_;
};

/// Binary tensor [T, C, ...] to position lists; trailing dims are flattened
/// row-major into the token axis.
[[nodiscard]] EncodedSpikeMap encode(const SpikeTensor& spikes, int pos_width = kDefaultPosWidth,
                                     const Exec& exec = {});

/// Exact inverse of encode, producing [T, C, L].
[[nodiscard]] SpikeTensor decode(const EncodedSpikeMap& map);

/// Fused LIF + position write. Each element of `spa_sequence` is one
/// timestep of shape [C, ...]. Bit-exact with encode(lif_run(...)).
[[nodiscard]] EncodedSpikeMap encode_from_potentials(std::span<const FixedTensor> spa_sequence,
                                                     const LifParams& params,
                                                     int pos_width = kDefaultPosWidth,
                                                     const Exec& exec = {});

/// Same as above for a [T, C, ...] membrane tensor.
[[nodiscard]] EncodedSpikeMap encode_from_potentials(const FixedTensor& spa_tcl,
                                                     const LifParams& params,
                                                     int pos_width = kDefaultPosWidth,
                                                     const Exec& exec = {});

/// 1 - spikes / (T * C * L); an empty-shaped map reports 1.
[[nodiscard]] double sparsity(const EncodedSpikeMap& map) noexcept;

/// Debug dump: one line per (t, c) as `t,c:p1 p2 p3`.
void write_dump(std::ostream& os, const EncodedSpikeMap& map);
[[nodiscard]] std::string format_dump(const EncodedSpikeMap& map);

/// Parses a dump back into a map of the given shape.
[[nodiscard]] EncodedSpikeMap parse_dump(std::istream& is, std::size_t timesteps,
                                         std::size_t channels, std::size_t tokens,
                                         int pos_width = kDefaultPosWidth);

}  // namespace sdt
