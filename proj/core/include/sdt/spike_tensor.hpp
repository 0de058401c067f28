// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sdt/fixedpoint.hpp"

namespace sdt {

/// Dense binary tensor, one byte per element, row-major. This is the
/// oracle-side form of a spike map; the engine itself passes spikes around
/// as EncodedSpikeMap.
class SpikeTensor {
 public:
  SpikeTensor() = default;
  explicit SpikeTensor(std::vector<std::size_t> dims)
      : dims_(std::move(dims)), bits_(element_count(dims_), 0) {}

  [[nodiscard]] const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  [[nodiscard]] std::size_t dim(std::size_t i) const { return dims_.at(i); }
  [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }

  [[nodiscard]] bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }

  [[nodiscard]] std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  [[nodiscard]] std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  friend bool operator==(const SpikeTensor&, const SpikeTensor&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::uint8_t> bits_;
};

}  // namespace sdt
