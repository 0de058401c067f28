// SPDX-License-Identifier: Apache-2.0

#include "sdt/pooling.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdt/parallel.hpp"

namespace sdt {

void PoolSpec::validate() const {
  if (kernel_h == 0 || kernel_w == 0 || stride_h == 0 || stride_w == 0) {
    throw std::invalid_argument("pool kernel and stride must be >= 1");
  }
  if (kernel_h > in_h || kernel_w > in_w) {
    throw std::invalid_argument("pool kernel " + std::to_string(kernel_h) + "x" +
                                std::to_string(kernel_w) + " exceeds input " +
                                std::to_string(in_h) + "x" + std::to_string(in_w));
  }
}

namespace {

struct WindowRange {
  std::size_t first;
  std::size_t last;  // inclusive; empty when first > last
};

// Output rows (or columns) whose window covers input coordinate x.
WindowRange covering(std::size_t x, std::size_t kernel, std::size_t stride, std::size_t n_out) {
  const std::size_t first = x + 1 > kernel ? (x + 1 - kernel + stride - 1) / stride : 0;
  const std::size_t last = std::min(x / stride, n_out - 1);
  return {first, last};
}

void check_spatial(const std::vector<std::size_t>& dims, const PoolSpec& spec) {
  if (dims.size() == 4) {
    if (dims[2] != spec.in_h || dims[3] != spec.in_w) {
      throw std::invalid_argument("dense_maxpool: spatial dims do not match the pool spec");
    }
  } else if (dims.size() == 3) {
    if (dims[2] != spec.in_h * spec.in_w) {
      throw std::invalid_argument("dense_maxpool: token count does not match the pool spec");
    }
  } else {
    throw std::invalid_argument("dense_maxpool expects [T, C, H, W] or [T, C, L]");
  }
}

}  // namespace

EncodedSpikeMap spike_maxpool(const EncodedSpikeMap& map, const PoolSpec& spec, int out_pos_width,
                              const Exec& exec) {
  spec.validate();
  if (map.tokens() != spec.in_h * spec.in_w) {
    throw std::invalid_argument("spike_maxpool: map has " + std::to_string(map.tokens()) +
                                " tokens, pool spec expects " +
                                std::to_string(spec.in_h * spec.in_w));
  }
  const std::size_t T = map.timesteps(), C = map.channels();
  const std::size_t out_h = spec.out_h(), out_w = spec.out_w();
  EncodedSpikeMap out(T, C, out_h * out_w, out_pos_width > 0 ? out_pos_width : map.pos_width());
  CounterSink sink;
  parallel_for(T * C, exec.threads, [&](std::size_t tc) {
    const std::size_t t = tc / C, c = tc % C;
    std::vector<std::uint8_t> hit(out_h * out_w, 0);
    std::uint64_t marks = 0;
    for (Position p : map.list(t, c)) {
      const std::size_t r = p / spec.in_w, col = p % spec.in_w;
      const auto rows = covering(r, spec.kernel_h, spec.stride_h, out_h);
      const auto cols = covering(col, spec.kernel_w, spec.stride_w, out_w);
      for (std::size_t oh = rows.first; oh <= rows.last; ++oh) {
        for (std::size_t ow = cols.first; ow <= cols.last; ++ow) {
          hit[oh * out_w + ow] = 1;
          ++marks;
        }
      }
    }
    std::vector<Position> pos;
    for (std::size_t m = 0; m < hit.size(); ++m) {
      if (hit[m]) pos.push_back(static_cast<Position>(m));
    }
    out.assign(t, c, std::move(pos));
    sink.add_executed(marks);
    sink.add_accumulates(marks);
  });
  if (exec.counters) {
    sink.flush(exec.counters);
    exec.counters->dense += T * C * spec.windows() * spec.area();
    exec.counters->input_spikes += map.spike_count();
    exec.counters->input_slots += map.slot_count();
  }
  return out;
}

SpikeTensor dense_maxpool(const SpikeTensor& x, const PoolSpec& spec) {
  spec.validate();
  check_spatial(x.dims(), spec);
  const std::size_t T = x.dim(0), C = x.dim(1);
  const std::size_t out_h = spec.out_h(), out_w = spec.out_w();
  SpikeTensor out({T, C, out_h, out_w});
  for (std::size_t tc = 0; tc < T * C; ++tc) {
    const std::size_t in_base = tc * spec.in_h * spec.in_w;
    for (std::size_t oh = 0; oh < out_h; ++oh) {
      for (std::size_t ow = 0; ow < out_w; ++ow) {
        bool any = false;
        for (std::size_t kh = 0; kh < spec.kernel_h; ++kh) {
          for (std::size_t kw = 0; kw < spec.kernel_w; ++kw) {
            const std::size_t r = oh * spec.stride_h + kh, col = ow * spec.stride_w + kw;
            any = any || x[in_base + r * spec.in_w + col];
          }
        }
        out.set((tc * out_h + oh) * out_w + ow, any);
      }
    }
  }
  return out;
}

FixedTensor dense_maxpool(const FixedTensor& x, const PoolSpec& spec) {
  spec.validate();
  check_spatial(x.dims(), spec);
  const std::size_t T = x.dim(0), C = x.dim(1);
  const std::size_t out_h = spec.out_h(), out_w = spec.out_w();
  FixedTensor out({T, C, out_h, out_w}, x.format());
  const auto in = x.data();
  auto dst = out.mutable_data();
  for (std::size_t tc = 0; tc < T * C; ++tc) {
    const std::size_t in_base = tc * spec.in_h * spec.in_w;
    for (std::size_t oh = 0; oh < out_h; ++oh) {
      for (std::size_t ow = 0; ow < out_w; ++ow) {
        std::int32_t best = std::numeric_limits<std::int32_t>::min();
        for (std::size_t kh = 0; kh < spec.kernel_h; ++kh) {
          for (std::size_t kw = 0; kw < spec.kernel_w; ++kw) {
            const std::size_t r = oh * spec.stride_h + kh, col = ow * spec.stride_w + kw;
            best = std::max(best, in[in_base + r * spec.in_w + col]);
          }
        }
        dst[(tc * out_h + oh) * out_w + ow] = best;
      }
    }
  }
  return out;
}

}  // namespace sdt
