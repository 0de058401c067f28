// SPDX-License-Identifier: Apache-2.0

#include "sdt/spike_stream.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "sdt/parallel.hpp"

namespace sdt {

EncodedSpikeMap::EncodedSpikeMap(std::size_t timesteps, std::size_t channels, std::size_t tokens,
                                 int pos_width)
    : timesteps_(timesteps), channels_(channels), tokens_(tokens), pos_width_(pos_width) {
  if (pos_width < 1 || pos_width > kMaxPosWidth) {
    throw std::invalid_argument("pos_width must be in [1, 16], got " + std::to_string(pos_width));
  }
  if (tokens > (std::size_t{1} << pos_width)) {
    throw CapacityError("token count " + std::to_string(tokens) + " exceeds the " +
                        std::to_string(pos_width) + "-bit address space");
  }
  lists_.resize(timesteps * channels);
}

void EncodedSpikeMap::assign(std::size_t t, std::size_t c, std::vector<Position> positions) {
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] >= tokens_) {
      throw std::invalid_argument("spike position " + std::to_string(positions[i]) +
                                  " out of range for " + std::to_string(tokens_) + " tokens");
    }
    if (i > 0 && positions[i] <= positions[i - 1]) {
      throw std::invalid_argument("spike positions must be strictly increasing");
    }
  }
  lists_[index(t, c)] = std::move(positions);
}

std::size_t EncodedSpikeMap::spike_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : lists_) n += l.size();
  return n;
}

EncodedSpikeMap encode(const SpikeTensor& spikes, int pos_width, const Exec& exec) {
  const auto& dims = spikes.dims();
  if (dims.size() < 3) throw std::invalid_argument("encode expects a [T, C, ...] tensor");
  const std::size_t T = dims[0];
  const std::size_t C = dims[1];
  const std::size_t L = element_count(std::span(dims).subspan(2));
  EncodedSpikeMap map(T, C, L, pos_width);
  const auto bits = spikes.bits();
  parallel_for(T * C, exec.threads, [&](std::size_t tc) {
    std::vector<Position> pos;
    const std::size_t base = tc * L;
    for (std::size_t l = 0; l < L; ++l) {
      if (bits[base + l]) pos.push_back(static_cast<Position>(l));
    }
    map.assign(tc / C, tc % C, std::move(pos));
  });
  if (exec.counters) {
    exec.counters->input_slots += T * C * L;
    exec.counters->input_spikes += map.spike_count();
  }
  return map;
}

SpikeTensor decode(const EncodedSpikeMap& map) {
  const std::size_t T = map.timesteps(), C = map.channels(), L = map.tokens();
  SpikeTensor out({T, C, L});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < C; ++c) {
      for (Position p : map.list(t, c)) out.set((t * C + c) * L + p, true);
    }
  }
  return out;
}

EncodedSpikeMap encode_from_potentials(std::span<const FixedTensor> spa_sequence,
                                       const LifParams& params, int pos_width, const Exec& exec) {
  if (spa_sequence.empty()) return EncodedSpikeMap(0, 0, 0, pos_width);
  const auto& dims = spa_sequence.front().dims();
  if (dims.size() < 2) throw std::invalid_argument("encode_from_potentials expects [C, ...] steps");
  const FixedFormat fmt = spa_sequence.front().format();
  for (const auto& s : spa_sequence) {
    if (s.dims() != dims || s.format() != fmt) {
      throw std::invalid_argument("encode_from_potentials: timesteps differ in shape or format");
    }
  }
  const std::size_t T = spa_sequence.size();
  const std::size_t C = dims[0];
  const std::size_t L = element_count(std::span(dims).subspan(1));
  EncodedSpikeMap map(T, C, L, pos_width);
  // Channels are independent neuron populations; time runs sequentially
  // inside each channel.
  parallel_for(C, exec.threads, [&](std::size_t c) {
    std::vector<std::int32_t> temp(L, 0);
    for (std::size_t t = 0; t < T; ++t) {
      const auto spa = spa_sequence[t].data().subspan(c * L, L);
      std::vector<Position> pos;
      for (std::size_t l = 0; l < L; ++l) {
        const auto u = lif_update(spa[l], temp[l], params, fmt);
        temp[l] = u.temp;
        if (u.fired) pos.push_back(static_cast<Position>(l));
      }
      map.assign(t, c, std::move(pos));
    }
  });
  return map;
}

EncodedSpikeMap encode_from_potentials(const FixedTensor& spa_tcl, const LifParams& params,
                                       int pos_width, const Exec& exec) {
  const auto steps = split_timesteps(spa_tcl);
  return encode_from_potentials(std::span<const FixedTensor>(steps), params, pos_width, exec);
}

double sparsity(const EncodedSpikeMap& map) noexcept {
  const std::size_t slots = map.slot_count();
  if (slots == 0) return 1.0;
  return 1.0 - static_cast<double>(map.spike_count()) / static_cast<double>(slots);
}

void write_dump(std::ostream& os, const EncodedSpikeMap& map) {
  for (std::size_t t = 0; t < map.timesteps(); ++t) {
    for (std::size_t c = 0; c < map.channels(); ++c) {
      os << t << ',' << c << ':';
      bool first = true;
      for (Position p : map.list(t, c)) {
        os << (first ? "" : " ") << p;
        first = false;
      }
      os << '\n';
    }
  }
}

std::string format_dump(const EncodedSpikeMap& map) {
  std::ostringstream os;
  write_dump(os, map);
  return os.str();
}

EncodedSpikeMap parse_dump(std::istream& is, std::size_t timesteps, std::size_t channels,
                           std::size_t tokens, int pos_width) {
  EncodedSpikeMap map(timesteps, channels, tokens, pos_width);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const auto colon = line.find(':');
    if (comma == std::string::npos || colon == std::string::npos || colon < comma) {
      throw std::invalid_argument("spike dump line " + std::to_string(lineno) + " is malformed");
    }
    const std::size_t t = std::stoul(line.substr(0, comma));
    const std::size_t c = std::stoul(line.substr(comma + 1, colon - comma - 1));
    std::istringstream rest(line.substr(colon + 1));
    std::vector<Position> pos;
    unsigned long p = 0;
    while (rest >> p) {
      if (p >= tokens) {
        throw std::invalid_argument("spike dump line " + std::to_string(lineno) +
                                    ": position out of range");
      }
      pos.push_back(static_cast<Position>(p));
    }
    map.assign(t, c, std::move(pos));
  }
  return map;
}

}  // namespace sdt
