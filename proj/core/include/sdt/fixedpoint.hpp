// SPDX-License-Identifier: Apache-2.0
//
// Saturating fixed-point scalars and tensors. A stored integer v in a format
// with scale exponent e represents the real value v * 2^e.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sdt {

/// Wide accumulator used by every gather/sum in the engine.
using acc_t = std::int32_t;

struct FixedFormat {
  int width = 10;
  int scale_exp = 0;
  bool is_signed = true;

  [[nodiscard]] std::int64_t min_value() const noexcept {
    return is_signed ? -(std::int64_t{1} << (width - 1)) : 0;
  }
  [[nodiscard]] std::int64_t max_value() const noexcept {
    return is_signed ? (std::int64_t{1} << (width - 1)) - 1 : (std::int64_t{1} << width) - 1;
  }
  [[nodiscard]] bool contains(std::int64_t v) const noexcept {
    return v >= min_value() && v <= max_value();
  }
  /// Throws std::invalid_argument when width is outside [2, 32].
  void validate() const;

  friend bool operator==(const FixedFormat&, const FixedFormat&) = default;
};

/// Accumulator format: 32-bit, at the given scale.
[[nodiscard]] inline FixedFormat accumulator_format(int scale_exp) {
  return FixedFormat{32, scale_exp, true};
}

/// Round-half-away-from-zero of real_value / 2^scale_exp, saturated to fmt.
[[nodiscard]] std::int32_t quantize(double real_value, const FixedFormat& fmt);

/// Real value of a stored integer.
[[nodiscard]] double dequantize(std::int64_t stored, const FixedFormat& fmt);

/// Clamp to the representable range of fmt.
[[nodiscard]] inline std::int32_t sat_narrow(std::int64_t acc, const FixedFormat& fmt) {
  return static_cast<std::int32_t>(std::clamp(acc, fmt.min_value(), fmt.max_value()));
}

/// Divides v by 2^shift rounding half away from zero (shift > 0), or
/// multiplies by 2^-shift (shift <= 0). The result is not saturated.
[[nodiscard]] inline std::int64_t shift_round(std::int64_t v, int shift) {
  if (shift <= 0) {
    // A left shift past 62 bits saturates to the int64 extremes; callers
    // narrow the result afterwards anyway.
    const int left = -shift;
    if (v == 0) return 0;
    if (left >= 62) return v > 0 ? INT64_MAX : INT64_MIN;
    const std::int64_t limit = INT64_MAX >> left;
    if (v > limit) return INT64_MAX;
    if (v < -limit) return INT64_MIN;
    return v * (std::int64_t{1} << left);
  }
  if (shift >= 63) return 0;
  const std::int64_t half = std::int64_t{1} << (shift - 1);
  const std::int64_t mag = v < 0 ? -v : v;
  const std::int64_t q = (mag + half) >> shift;
  return v < 0 ? -q : q;
}

/// Re-expresses an accumulator at scale acc_exp in fmt's scale, then
/// saturates. This is the single saturation-truncation stage at a layer output.
[[nodiscard]] inline std::int32_t rescale_saturate(std::int64_t acc, int acc_exp, const FixedFormat& fmt) {
  return sat_narrow(shift_round(acc, fmt.scale_exp - acc_exp), fmt);
}

/// Smallest scale exponent for which max_abs quantizes without clipping.
[[nodiscard]] int choose_scale_exp(double max_abs, int width);

class FixedTensor {
 public:
  FixedTensor() = default;
  /// All-zero tensor.
  FixedTensor(std::vector<std::size_t> dims, FixedFormat fmt);
  /// Throws std::invalid_argument if the data length disagrees with dims or
  /// any element lies outside fmt's range.
  FixedTensor(std::vector<std::size_t> dims, std::vector<std::int32_t> data, FixedFormat fmt);

  [[nodiscard]] const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  [[nodiscard]] std::size_t dim(std::size_t i) const { return dims_.at(i); }
  [[nodiscard]] std::size_t rank() const noexcept { return dims_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] const FixedFormat& format() const noexcept { return fmt_; }

  [[nodiscard]] std::span<const std::int32_t> data() const noexcept { return data_; }
  [[nodiscard]] std::span<std::int32_t> mutable_data() noexcept { return data_; }
  [[nodiscard]] std::int32_t operator[](std::size_t i) const { return data_[i]; }

  /// Stores sat_narrow(v) at flat index i.
  void set(std::size_t i, std::int64_t v) { data_[i] = sat_narrow(v, fmt_); }

  friend bool operator==(const FixedTensor&, const FixedTensor&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::int32_t> data_;
  FixedFormat fmt_{};
};

[[nodiscard]] std::size_t element_count(std::span<const std::size_t> dims);
[[nodiscard]] std::string dims_to_string(std::span<const std::size_t> dims);

/// Per-element wide add then saturation into the shared format. Throws
/// std::invalid_argument on a dims or format mismatch.
[[nodiscard]] FixedTensor add_elementwise(const FixedTensor& a, const FixedTensor& b);

}  // namespace sdt
