// SPDX-License-Identifier: Apache-2.0

#include "sdt/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sdt {

void FixedFormat::validate() const {
  if (width < 2 || width > 32) {
    throw std::invalid_argument("fixed-point width must be in [2, 32], got " +
                                std::to_string(width));
  }
  if (!is_signed && width > 31) {
    throw std::invalid_argument("unsigned fixed-point width must be <= 31");
  }
}

std::int32_t quantize(double real_value, const FixedFormat& fmt) {
  const double scaled = std::round(std::ldexp(real_value, -fmt.scale_exp));
  const auto lo = static_cast<double>(fmt.min_value());
  const auto hi = static_cast<double>(fmt.max_value());
  if (std::isnan(scaled)) return 0;
  return static_cast<std::int32_t>(std::clamp(scaled, lo, hi));
}

double dequantize(std::int64_t stored, const FixedFormat& fmt) {
  return std::ldexp(static_cast<double>(stored), fmt.scale_exp);
}

int choose_scale_exp(double max_abs, int width) {
  if (!(max_abs > 0.0) || !std::isfinite(max_abs)) return 0;
  const double limit = static_cast<double>((std::int64_t{1} << (width - 1)) - 1);
  int e = static_cast<int>(std::ceil(std::log2(max_abs / limit)));
  // log2 can land one off at exact powers of two; settle on the smallest fit.
  while (std::round(std::ldexp(max_abs, -(e - 1))) <= limit) --e;
  while (std::round(std::ldexp(max_abs, -e)) > limit) ++e;
  return e;
}

std::size_t element_count(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

std::string dims_to_string(std::span<const std::size_t> dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? ", " : "") << dims[i];
  os << ']';
  return os.str();
}

FixedTensor::FixedTensor(std::vector<std::size_t> dims, FixedFormat fmt)
    : dims_(std::move(dims)), fmt_(fmt) {
  fmt_.validate();
  data_.assign(element_count(dims_), 0);
  if (!fmt_.contains(0)) {
    throw std::invalid_argument("fixed-point format cannot represent zero");
  }
}

FixedTensor::FixedTensor(std::vector<std::size_t> dims, std::vector<std::int32_t> data,
                         FixedFormat fmt)
    : dims_(std::move(dims)), data_(std::move(data)), fmt_(fmt) {
  fmt_.validate();
  if (data_.size() != element_count(dims_)) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match dims " + dims_to_string(dims_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!fmt_.contains(data_[i])) {
      throw std::invalid_argument("tensor element " + std::to_string(i) + " = " +
                                  std::to_string(data_[i]) + " outside " +
                                  std::to_string(fmt_.width) + "-bit range");
    }
  }
}

FixedTensor add_elementwise(const FixedTensor& a, const FixedTensor& b) {
  if (a.dims() != b.dims()) {
    throw std::invalid_argument("add_elementwise: dims " + dims_to_string(a.dims()) + " vs " +
                                dims_to_string(b.dims()));
  }
  if (a.format() != b.format()) {
    throw std::invalid_argument("add_elementwise: operands use different formats");
  }
  FixedTensor out(a.dims(), a.format());
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.set(i, std::int64_t{x[i]} + y[i]);
  }
  return out;
}

}  // namespace sdt
