// SPDX-License-Identifier: Apache-2.0
//
// Random instance builders shared by the unit and acceptance tests. Oracles
// live next to the tests that use them and never call the engine.

#pragma once

#include <cstdint>
#include <vector>

#include "sdt/fixedpoint.hpp"
#include "sdt/generate.hpp"
#include "sdt/linear.hpp"
#include "sdt/spike_stream.hpp"
#include "sdt/spike_tensor.hpp"

namespace sdt::testing {

inline SpikeTensor random_spikes(Rng& rng, std::vector<std::size_t> dims, double rate) {
  SpikeTensor s(std::move(dims));
  for (std::size_t i = 0; i < s.size(); ++i) s.set(i, rng.bernoulli(rate));
  return s;
}

inline EncodedSpikeMap random_map(Rng& rng, std::size_t T, std::size_t C, std::size_t L, double rate,
                                  int pos_width = kDefaultPosWidth) {
  return encode(random_spikes(rng, {T, C, L}, rate), pos_width);
}

inline FixedTensor random_fixed(Rng& rng, std::vector<std::size_t> dims, FixedFormat fmt) {
  FixedTensor x(std::move(dims), fmt);
  const auto span = static_cast<std::uint64_t>(fmt.max_value() - fmt.min_value() + 1);
  for (auto& v : x.mutable_data()) v = static_cast<std::int32_t>(fmt.min_value() + static_cast<std::int64_t>(rng.below(span)));
  return x;
}

inline LinearWeights random_linear(Rng& rng, std::size_t c_in, std::size_t c_out, int scale_exp = -8) {
  const FixedFormat wf{10, scale_exp, true};
  LinearWeights lw{random_fixed(rng, {c_out, c_in}, wf), random_fixed(rng, {c_out}, FixedFormat{16, scale_exp, true})};
  return lw;
}

}  // namespace sdt::testing
