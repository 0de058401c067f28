// SPDX-License-Identifier: Apache-2.0

#include "sdt/attention.hpp"

#include <cassert>
#include <stdexcept>
#include <string>

#include "sdt/parallel.hpp"

namespace sdt {

namespace {

[[maybe_unused]] bool strictly_increasing(std::span<const Position> v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] <= v[i - 1]) return false;
  }
  return true;
}

}  // namespace

std::size_t intersect_count(std::span<const Position> a, std::span<const Position> b,
                            std::size_t* steps) {
  assert(strictly_increasing(a) && strictly_increasing(b));
  std::size_t i = 0, j = 0, matches = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    ++n;
    if (a[i] == b[j]) {
      ++matches;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  if (steps) *steps = n;
  return matches;
}

ChannelMask sdsa_mask(const EncodedSpikeMap& qs, const EncodedSpikeMap& ks, std::int64_t v_th_attn,
                      std::size_t n_heads, const Exec& exec) {
  if (!qs.same_shape(ks)) throw std::invalid_argument("sdsa_mask: Q and K shapes differ");
  const std::size_t T = qs.timesteps(), C = qs.channels();
  if (n_heads == 0 || (C > 0 && C % n_heads != 0)) {
    throw std::invalid_argument("sdsa_mask: " + std::to_string(C) +
                                " channels cannot be split into " + std::to_string(n_heads) +
                                " heads");
  }
  ChannelMask mask(T, C);
  std::vector<std::uint8_t> bits(T * C, 0);
  CounterSink sink;
  const std::size_t per_head = C / n_heads;
  // One task per (timestep, head); channels inside a head run in order.
  parallel_for(T * n_heads, exec.threads, [&](std::size_t task) {
    const std::size_t t = task / n_heads, h = task % n_heads;
    std::uint64_t head_steps = 0;
    for (std::size_t c = h * per_head; c < (h + 1) * per_head; ++c) {
      std::size_t steps = 0;
      const auto count = intersect_count(qs.list(t, c), ks.list(t, c), &steps);
      head_steps += steps;
      bits[t * C + c] = static_cast<std::int64_t>(count) >= v_th_attn ? 1 : 0;
    }
    sink.add_steps(head_steps);
    sink.add_executed(head_steps);
  });
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < C; ++c) mask.set(t, c, bits[t * C + c] != 0);
  }
  if (exec.counters) {
    sink.flush(exec.counters);
    exec.counters->dense += T * C * qs.tokens();
    exec.counters->input_spikes += qs.spike_count() + ks.spike_count();
    exec.counters->input_slots += qs.slot_count() + ks.slot_count();
  }
  return mask;
}

EncodedSpikeMap apply_mask(const EncodedSpikeMap& vs, const ChannelMask& mask) {
  if (vs.timesteps() != mask.timesteps() || vs.channels() != mask.channels()) {
    throw std::invalid_argument("apply_mask: mask shape does not match V");
  }
  EncodedSpikeMap out(vs.timesteps(), vs.channels(), vs.tokens(), vs.pos_width());
  for (std::size_t t = 0; t < vs.timesteps(); ++t) {
    for (std::size_t c = 0; c < vs.channels(); ++c) {
      if (mask.get(t, c)) {
        const auto l = vs.list(t, c);
        out.assign(t, c, std::vector<Position>(l.begin(), l.end()));
      }
    }
  }
  return out;
}

EncodedSpikeMap sdsa(const EncodedSpikeMap& qs, const EncodedSpikeMap& ks,
                     const EncodedSpikeMap& vs, std::int64_t v_th_attn, std::size_t n_heads,
                     const Exec& exec) {
  if (!qs.same_shape(vs)) throw std::invalid_argument("sdsa: V shape differs from Q/K");
  return apply_mask(vs, sdsa_mask(qs, ks, v_th_attn, n_heads, exec));
}

}  // namespace sdt
