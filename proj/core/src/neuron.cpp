// SPDX-License-Identifier: Apache-2.0

#include "sdt/neuron.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sdt {

Decay Decay::from_real(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1], got " + std::to_string(value));
  }
  for (int shift = 0; shift <= 16; ++shift) {
    const double scaled = std::ldexp(value, shift);
    if (scaled == std::floor(scaled)) {
      // Keep at least one fractional bit so gamma = 1 and 0 stay well formed.
      const int k = shift == 0 ? 1 : shift;
      return Decay{static_cast<std::int32_t>(std::ldexp(value, k)), k};
    }
  }
  throw std::invalid_argument("gamma " + std::to_string(value) +
                              " is not a multiple of 2^-16");
}

double Decay::value() const noexcept { return std::ldexp(static_cast<double>(num), -shift); }

void Decay::validate() const {
  if (shift < 0 || shift > 30 || num < 0 || num > (std::int32_t{1} << shift)) {
    throw std::invalid_argument("gamma must be num/2^shift within [0, 1]");
  }
}

LifParams LifParams::from_real(double v_th, double v_reset, double gamma,
                               const FixedFormat& mem_fmt) {
  LifParams p{quantize(v_th, mem_fmt), quantize(v_reset, mem_fmt), Decay::from_real(gamma)};
  p.validate();
  return p;
}

void LifParams::validate() const {
  gamma.validate();
  if (v_th <= v_reset) {
    throw std::invalid_argument("LIF threshold must exceed the reset value");
  }
}

LifState LifState::fresh(std::vector<std::size_t> dims, const FixedFormat& mem_fmt) {
  return LifState{FixedTensor(std::move(dims), mem_fmt), 0};
}

std::pair<SpikeTensor, LifState> lif_step(const LifState& state, const FixedTensor& spa,
                                          const LifParams& params) {
  if (spa.dims() != state.temp_prev.dims()) {
    throw std::invalid_argument("lif_step: input dims " + dims_to_string(spa.dims()) +
                                " do not match neuron state " +
                                dims_to_string(state.temp_prev.dims()));
  }
  if (spa.format() != state.temp_prev.format()) {
    throw std::invalid_argument("lif_step: input is not in the membrane format");
  }
  const FixedFormat& fmt = spa.format();
  SpikeTensor spikes(spa.dims());
  LifState next{FixedTensor(spa.dims(), fmt), state.t + 1};
  const auto in = spa.data();
  const auto prev = state.temp_prev.data();
  auto temp = next.temp_prev.mutable_data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto u = lif_update(in[i], prev[i], params, fmt);
    spikes.set(i, u.fired);
    temp[i] = u.temp;
  }
  return {std::move(spikes), std::move(next)};
}

std::vector<SpikeTensor> lif_run(std::span<const FixedTensor> spa_sequence,
                                 const LifParams& params) {
  std::vector<SpikeTensor> out;
  if (spa_sequence.empty()) return out;
  out.reserve(spa_sequence.size());
  auto state = LifState::fresh(spa_sequence.front().dims(), spa_sequence.front().format());
  for (const auto& spa : spa_sequence) {
    auto [spikes, next] = lif_step(state, spa, params);
    out.push_back(std::move(spikes));
    state = std::move(next);
  }
  return out;
}

std::vector<FixedTensor> split_timesteps(const FixedTensor& x) {
  if (x.rank() < 2) throw std::invalid_argument("split_timesteps: tensor needs rank >= 2");
  const std::vector<std::size_t> inner(x.dims().begin() + 1, x.dims().end());
  const std::size_t step = element_count(inner);
  std::vector<FixedTensor> out;
  out.reserve(x.dim(0));
  const auto data = x.data();
  for (std::size_t t = 0; t < x.dim(0); ++t) {
    std::vector<std::int32_t> slice(data.begin() + static_cast<std::ptrdiff_t>(t * step),
                                    data.begin() + static_cast<std::ptrdiff_t>((t + 1) * step));
    out.emplace_back(inner, std::move(slice), x.format());
  }
  return out;
}

}  // namespace sdt
