// SPDX-License-Identifier: Apache-2.0

#include "sdt/linear.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdt/parallel.hpp"

namespace sdt {

void LinearWeights::validate() const {
  if (w.rank() != 2) throw std::invalid_argument("linear weights must be [C_out, C_in]");
  if (bias.rank() != 1 || bias.dim(0) != w.dim(0)) {
    throw std::invalid_argument("linear bias must be [C_out]");
  }
  if (bias.format().scale_exp != w.format().scale_exp) {
    throw std::invalid_argument("linear bias must be stored at the weight scale");
  }
  const std::int64_t bound = static_cast<std::int64_t>(w.dim(1)) *
                                 std::max(-w.format().min_value(), w.format().max_value()) +
                             std::max(-bias.format().min_value(), bias.format().max_value());
  if (bound > INT32_MAX) {
    throw std::invalid_argument("linear fan-in " + std::to_string(w.dim(1)) +
                                " can overflow the 32-bit accumulator");
  }
}

FixedTensor spike_linear(const EncodedSpikeMap& map, const LinearWeights& weights,
                         const FixedFormat& out_fmt, const Exec& exec) {
  weights.validate();
  const std::size_t T = map.timesteps(), C_in = map.channels(), L = map.tokens();
  const std::size_t C_out = weights.out_features();
  if (weights.in_features() != C_in) {
    throw std::invalid_argument("spike_linear: map has " + std::to_string(C_in) +
                                " channels, weights expect " +
                                std::to_string(weights.in_features()));
  }

  // Column-major copy so each spike reads one contiguous weight column.
  std::vector<acc_t> columns(C_in * C_out);
  const auto w = weights.w.data();
  for (std::size_t o = 0; o < C_out; ++o) {
    for (std::size_t c = 0; c < C_in; ++c) columns[c * C_out + o] = w[o * C_in + c];
  }

  const std::size_t parts = std::clamp<std::size_t>(exec.threads, 1, std::max<std::size_t>(C_in, 1));
  const std::size_t per_part = (C_in + parts - 1) / std::max<std::size_t>(parts, 1);
  // partial[t][part] holds a [L, C_out] accumulator block.
  std::vector<std::vector<acc_t>> partial(T * parts);
  CounterSink sink;
  parallel_for(T * parts, exec.threads, [&](std::size_t task) {
    const std::size_t t = task / parts, part = task % parts;
    auto& acc = partial[task];
    acc.assign(L * C_out, 0);
    std::uint64_t adds = 0;
    const std::size_t c_end = std::min(C_in, (part + 1) * per_part);
    for (std::size_t c = part * per_part; c < c_end; ++c) {
      const acc_t* col = columns.data() + c * C_out;
      for (Position l : map.list(t, c)) {
        acc_t* dst = acc.data() + static_cast<std::size_t>(l) * C_out;
        for (std::size_t o = 0; o < C_out; ++o) dst[o] += col[o];
        adds += C_out;
      }
    }
    sink.add_accumulates(adds);
    sink.add_executed(adds);
  });

  FixedTensor out({T, C_out, L}, out_fmt);
  auto dst = out.mutable_data();
  const auto bias = weights.bias.data();
  const int acc_exp = weights.w.format().scale_exp;
  std::vector<acc_t> column(C_out);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      std::copy(bias.begin(), bias.end(), column.begin());
      for (std::size_t part = 0; part < parts; ++part) {
        const acc_t* src = partial[t * parts + part].data() + l * C_out;
        for (std::size_t o = 0; o < C_out; ++o) column[o] += src[o];
      }
      for (std::size_t o = 0; o < C_out; ++o) dst[(t * C_out + o) * L + l] = rescale_saturate(column[o], acc_exp, out_fmt);
    }
  }
  if (exec.counters) {
    sink.flush(exec.counters);
    exec.counters->dense += T * C_in * L * C_out;
    exec.counters->input_spikes += map.spike_count();
    exec.counters->input_slots += map.slot_count();
  }
  return out;
}

EncodedSpikeMap spike_linear_into_neuron(const EncodedSpikeMap& map, const LinearWeights& weights,
                                         const FixedFormat& mem_fmt, const LifParams& params,
                                         int pos_width, const Exec& exec) {
  const auto potentials = spike_linear(map, weights, mem_fmt, exec);
  return encode_from_potentials(potentials, params, pos_width, Exec{exec.threads, nullptr});
}

}  // namespace sdt
