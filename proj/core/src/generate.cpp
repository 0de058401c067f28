// SPDX-License-Identifier: Apache-2.0

#include "sdt/generate.hpp"

#include <algorithm>
#include <cmath>

#include "sdt/dense_ops.hpp"

namespace sdt {

namespace {

constexpr int kBiasWidth = 16;

BatchNorm random_bn(Rng& rng, std::size_t channels) {
  BatchNorm bn;
  bn.eps = 1e-5;
  for (std::size_t c = 0; c < channels; ++c) {
    bn.gamma.push_back(rng.uniform(0.8, 1.2));
    bn.beta.push_back(rng.uniform(-0.1, 0.1));
    bn.mean.push_back(rng.uniform(-0.05, 0.05));
    bn.var.push_back(rng.uniform(0.8, 1.2));
  }
  return bn;
}

struct QuantizedLayer {
  FixedTensor w;
  FixedTensor bias;
};

// Draws a layer with `fan_in` inputs per output, folds a random BN into it
// and quantizes. `in_scale_exp` is the scale of the layer's input so the bias
// lands at the accumulator scale.
QuantizedLayer draw_layer(Rng& rng, std::vector<std::size_t> w_dims, std::size_t fan_in,
                          double input_power, int in_scale_exp, int weight_width,
                          const GenOptions& opts) {
  const std::size_t c_out = w_dims.front();
  const std::size_t count = element_count(w_dims);
  const double a = opts.gain * std::sqrt(3.0 / (static_cast<double>(fan_in) * input_power));
  std::vector<double> w(count), b(c_out);
  for (auto& v : w) v = rng.uniform(-a, a);
  for (auto& v : b) v = rng.uniform(opts.bias_lo, opts.bias_hi);
  const auto folded = fold_bn(w, b, random_bn(rng, c_out));

  auto qw = quantize_tensor(std::move(w_dims), folded.w, weight_width);
  const FixedFormat bias_fmt{kBiasWidth, in_scale_exp + qw.format().scale_exp, true};
  FixedTensor qb({c_out}, bias_fmt);
  for (std::size_t o = 0; o < c_out; ++o) qb.set(o, quantize(folded.bias[o], bias_fmt));
  return {std::move(qw), std::move(qb)};
}

ConvWeights draw_conv(Rng& rng, std::size_t c_in, const ConvSpec& spec, double input_power,
                      int in_scale_exp, int weight_width, const GenOptions& opts) {
  const std::size_t fan_in = c_in * spec.kernel * spec.kernel;
  auto layer = draw_layer(rng, {spec.out_channels, c_in, spec.kernel, spec.kernel}, fan_in,
                          input_power, in_scale_exp, weight_width, opts);
  return ConvWeights{std::move(layer.w), std::move(layer.bias), spec.stride, spec.padding};
}

LinearWeights draw_linear(Rng& rng, std::size_t c_in, std::size_t c_out, int weight_width,
                          const GenOptions& opts) {
  auto layer = draw_layer(rng, {c_out, c_in}, c_in, opts.input_rate, 0, weight_width, opts);
  return LinearWeights{std::move(layer.w), std::move(layer.bias)};
}

}  // namespace

FixedTensor quantize_tensor(std::vector<std::size_t> dims, std::span<const double> values, int width) {
  double max_abs = 0.0;
  for (double v : values) max_abs = std::max(max_abs, std::fabs(v));
  const FixedFormat fmt{width, choose_scale_exp(max_abs, width), true};
  FixedTensor out(std::move(dims), fmt);
  for (std::size_t i = 0; i < values.size(); ++i) out.set(i, quantize(values[i], fmt));
  return out;
}

ModelWeights random_weights(const ModelConfig& cfg, std::uint64_t seed, const GenOptions& opts) {
  cfg.validate();
  Rng rng(seed);
  ModelWeights mw;
  const auto geo = cfg.geometry();
  const int ww = cfg.weight_width;
  for (std::size_t i = 0; i < geo.size(); ++i) {
    // The image is uniform on [0, 1) (mean square 1/3); later stages see spikes.
    const bool image = i == 0;
    mw.sps.push_back(draw_conv(rng, geo[i].in_c, cfg.sps_stages[i].conv,
                               image ? 1.0 / 3.0 : opts.input_rate,
                               image ? cfg.act_scale_exp : kBinaryFormat.scale_exp, ww, opts));
  }
  const ConvSpec rpe{cfg.embed_dim, cfg.rpe_kernel, 1, cfg.rpe_kernel / 2};
  mw.rpe = draw_conv(rng, cfg.embed_dim, rpe, opts.input_rate, kBinaryFormat.scale_exp, ww, opts);
  const std::size_t D = cfg.embed_dim, H = cfg.hidden_dim();
  for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
    BlockWeights bw{draw_linear(rng, D, D, ww, opts),      draw_linear(rng, D, D, ww, opts),
                    draw_linear(rng, D, D, ww, opts),      draw_linear(rng, D, D, ww, opts),
                    draw_linear(rng, D, H, ww, opts),      draw_linear(rng, H, D, ww, opts)};
    mw.blocks.push_back(std::move(bw));
  }
  mw.head = draw_linear(rng, D, cfg.n_classes, ww, opts);
  return mw;
}

FixedTensor random_input(const ModelConfig& cfg, std::uint64_t seed) {
  Rng rng(seed ^ 0x5EEDF00Dull);
  const auto fmt = cfg.act_format();
  const std::size_t frame = cfg.in_c * cfg.in_h * cfg.in_w;
  std::vector<double> img(frame);
  for (auto& v : img) v = rng.uniform();
  FixedTensor x({cfg.timesteps, cfg.in_c, cfg.in_h, cfg.in_w}, fmt);
  for (std::size_t t = 0; t < cfg.timesteps; ++t) {
    for (std::size_t i = 0; i < frame; ++i) x.set(t * frame + i, quantize(img[i], fmt));
  }
  return x;
}

}  // namespace sdt
