// SPDX-License-Identifier: Apache-2.0

#include "sdt/dense_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sdt/parallel.hpp"

namespace sdt {

namespace {

std::int64_t magnitude_bound(const FixedFormat& f) {
  return std::max(-f.min_value(), f.max_value());
}

}  // namespace

FixedTensor conv2d(const FixedTensor& x, const ConvWeights& weights, const FixedFormat& out_fmt,
                   const Exec& exec) {
  const auto& w = weights.w;
  if (x.rank() != 4 || w.rank() != 4) {
    throw std::invalid_argument("conv2d expects x [T, C, H, W] and w [C_out, C_in, K_h, K_w]");
  }
  const std::size_t T = x.dim(0), C_in = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t C_out = w.dim(0), K_h = w.dim(2), K_w = w.dim(3);
  if (w.dim(1) != C_in) {
    throw std::invalid_argument("conv2d: input has " + std::to_string(C_in) +
                                " channels, weights expect " + std::to_string(w.dim(1)));
  }
  if (weights.bias.rank() != 1 || weights.bias.dim(0) != C_out) {
    throw std::invalid_argument("conv2d: bias must be [C_out]");
  }
  const int acc_exp = x.format().scale_exp + w.format().scale_exp;
  if (weights.bias.format().scale_exp != acc_exp) {
    throw std::invalid_argument("conv2d: bias must be stored at the accumulator scale");
  }
  if (weights.stride == 0 || H + 2 * weights.padding < K_h || W + 2 * weights.padding < K_w) {
    throw std::invalid_argument("conv2d: kernel does not fit the padded input");
  }
  const std::int64_t bound =
      static_cast<std::int64_t>(C_in * K_h * K_w) * magnitude_bound(x.format()) *
          magnitude_bound(w.format()) +
      magnitude_bound(weights.bias.format());
  if (bound > INT32_MAX) {
    throw std::invalid_argument("conv2d: fan-in can overflow the 32-bit accumulator");
  }

  const std::size_t H_out = weights.out_size(H, K_h), W_out = weights.out_size(W, K_w);
  const std::size_t stride = weights.stride;
  const auto pad = static_cast<std::ptrdiff_t>(weights.padding);
  FixedTensor out({T, C_out, H_out, W_out}, out_fmt);
  const auto in = x.data();
  const auto wd = w.data();
  const auto bias = weights.bias.data();
  auto dst = out.mutable_data();

  parallel_for(T * C_out, exec.threads, [&](std::size_t task) {
    const std::size_t t = task / C_out, co = task % C_out;
    std::vector<acc_t> acc(H_out * W_out, bias[co]);
    for (std::size_t ci = 0; ci < C_in; ++ci) {
      const std::int32_t* plane = in.data() + ((t * C_in + ci) * H) * W;
      for (std::size_t kh = 0; kh < K_h; ++kh) {
        for (std::size_t kw = 0; kw < K_w; ++kw) {
          const acc_t wv = wd[((co * C_in + ci) * K_h + kh) * K_w + kw];
          if (wv == 0) continue;
          // Output columns whose input column lands inside [0, W).
          const auto off_w = static_cast<std::ptrdiff_t>(kw) - pad;
          std::size_t ow_lo = 0;
          if (off_w < 0) ow_lo = (static_cast<std::size_t>(-off_w) + stride - 1) / stride;
          const auto max_iw = static_cast<std::ptrdiff_t>(W) - 1 - off_w;
          if (max_iw < 0) continue;
          const std::size_t ow_hi = std::min(W_out, static_cast<std::size_t>(max_iw) / stride + 1);
          for (std::size_t oh = 0; oh < H_out; ++oh) {
            const auto ih = static_cast<std::ptrdiff_t>(oh * stride + kh) - pad;
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
            const std::int32_t* row = plane + static_cast<std::size_t>(ih) * W;
            acc_t* arow = acc.data() + oh * W_out;
            for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) {
              arow[ow] += wv * row[static_cast<std::ptrdiff_t>(ow * stride) + off_w];
            }
          }
        }
      }
    }
    std::int32_t* o = dst.data() + task * H_out * W_out;
    for (std::size_t i = 0; i < acc.size(); ++i) o[i] = rescale_saturate(acc[i], acc_exp, out_fmt);
  });
  if (exec.counters) {
    const std::uint64_t macs = T * C_out * H_out * W_out * C_in * K_h * K_w;
    exec.counters->executed += macs;
    exec.counters->dense += macs;
    exec.counters->input_slots += x.size();
    exec.counters->input_spikes +=
        static_cast<std::uint64_t>(std::count_if(x.data().begin(), x.data().end(), [](std::int32_t v) { return v != 0; }));
  }
  return out;
}

BatchNorm BatchNorm::identity(std::size_t channels) {
  return BatchNorm{std::vector<double>(channels, 1.0), std::vector<double>(channels, 0.0),
                   std::vector<double>(channels, 0.0), std::vector<double>(channels, 1.0), 0.0};
}

FoldedParams fold_bn(std::span<const double> w, std::span<const double> bias, const BatchNorm& bn) {
  const std::size_t C = bias.size();
  if (bn.gamma.size() != C || bn.beta.size() != C || bn.mean.size() != C || bn.var.size() != C) {
    throw std::invalid_argument("fold_bn: batch-norm parameters do not match the channel count");
  }
  if (C == 0 || w.size() % C != 0) {
    throw std::invalid_argument("fold_bn: weight count is not a multiple of the channel count");
  }
  const std::size_t per_channel = w.size() / C;
  FoldedParams out{std::vector<double>(w.begin(), w.end()), std::vector<double>(C)};
  for (std::size_t c = 0; c < C; ++c) {
    const double denom = bn.var[c] + bn.eps;
    if (!(denom > 0.0)) {
      throw std::invalid_argument("fold_bn: variance + eps must be positive for channel " +
                                  std::to_string(c));
    }
    const double k = bn.gamma[c] / std::sqrt(denom);
    for (std::size_t i = 0; i < per_channel; ++i) out.w[c * per_channel + i] *= k;
    out.bias[c] = (bias[c] - bn.mean[c]) * k + bn.beta[c];
  }
  return out;
}

}  // namespace sdt
