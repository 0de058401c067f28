// SPDX-License-Identifier: Apache-2.0

#include "sdt/model.hpp"

#include <stdexcept>
#include <string>

#include "sdt/attention.hpp"

namespace sdt {

ModelConfig ModelConfig::toy() {
  ModelConfig cfg;
  cfg.sps_stages = {SpsStage{ConvSpec{32, 3, 1, 1}, 2, 2}, SpsStage{ConvSpec{64, 3, 1, 1}, 2, 2}};
  return cfg;
}

std::vector<ModelConfig::StageGeometry> ModelConfig::geometry() const {
  std::vector<StageGeometry> out;
  std::size_t c = in_c, h = in_h, w = in_w;
  for (std::size_t i = 0; i < sps_stages.size(); ++i) {
    const auto& s = sps_stages[i];
    const auto& cv = s.conv;
    const std::string where = "sps stage " + std::to_string(i);
    if (cv.out_channels == 0 || cv.kernel == 0 || cv.stride == 0) {
      throw std::invalid_argument(where + ": conv needs channels, kernel and stride >= 1");
    }
    if (h + 2 * cv.padding < cv.kernel || w + 2 * cv.padding < cv.kernel) {
      throw std::invalid_argument(where + ": conv kernel larger than padded input");
    }
    StageGeometry g{c, h, w, (h + 2 * cv.padding - cv.kernel) / cv.stride + 1,
                    (w + 2 * cv.padding - cv.kernel) / cv.stride + 1, {}};
    g.pool = PoolSpec{s.pool_kernel, s.pool_kernel, s.pool_stride, s.pool_stride, g.conv_h, g.conv_w};
    try {
      g.pool.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
    c = cv.out_channels;
    h = g.pool.out_h();
    w = g.pool.out_w();
    out.push_back(g);
  }
  return out;
}

std::size_t ModelConfig::token_h() const {
  const auto g = geometry();
  return g.empty() ? in_h : g.back().pool.out_h();
}

std::size_t ModelConfig::token_w() const {
  const auto g = geometry();
  return g.empty() ? in_w : g.back().pool.out_w();
}

void ModelConfig::validate() const {
  if (timesteps == 0) throw std::invalid_argument("timesteps must be >= 1");
  if (in_c == 0 || in_h == 0 || in_w == 0) throw std::invalid_argument("input dims must be >= 1");
  if (sps_stages.empty()) throw std::invalid_argument("at least one sps stage is required");
  if (sps_stages.back().conv.out_channels != embed_dim) {
    throw std::invalid_argument("last sps stage must produce embed_dim channels");
  }
  if (rpe_kernel == 0 || rpe_kernel % 2 == 0) throw std::invalid_argument("rpe_kernel must be odd");
  if (embed_dim == 0 || n_heads == 0 || embed_dim % n_heads != 0) {
    throw std::invalid_argument("embed_dim must be divisible by n_heads");
  }
  if (mlp_ratio == 0 || n_classes == 0) throw std::invalid_argument("mlp_ratio and n_classes must be >= 1");
  if (v_th_attn < 0) throw std::invalid_argument("v_th_attn must be >= 0");
  if (act_width < 2 || act_width > 16 || weight_width < 2 || weight_width > 16) {
    throw std::invalid_argument("quantization widths must be in [2, 16]");
  }
  if (pos_width < 1 || pos_width > kMaxPosWidth) throw std::invalid_argument("pos_width must be in [1, 16]");
  (void)lif();
  const std::size_t L = tokens();
  if (L > (std::size_t{1} << pos_width)) {
    throw CapacityError("token grid of " + std::to_string(L) + " exceeds " +
                        std::to_string(pos_width) + "-bit spike addresses");
  }
  for (const auto& g : geometry()) {
    if (g.conv_h * g.conv_w > (std::size_t{1} << kSpsPosWidth)) {
      throw CapacityError("sps feature map exceeds 16-bit spike addresses");
    }
  }
}

namespace {

void check_conv(const ConvWeights& cw, std::size_t c_in, std::size_t c_out, std::size_t k,
                const std::string& name) {
  if (cw.w.rank() != 4 || cw.w.dim(0) != c_out || cw.w.dim(1) != c_in || cw.w.dim(2) != k ||
      cw.w.dim(3) != k) {
    throw std::invalid_argument(name + ": expected weights " +
                                dims_to_string(std::vector<std::size_t>{c_out, c_in, k, k}) +
                                ", got " + dims_to_string(cw.w.dims()));
  }
  if (cw.bias.rank() != 1 || cw.bias.dim(0) != c_out) {
    throw std::invalid_argument(name + ": bias must be [" + std::to_string(c_out) + "]");
  }
}

void check_linear(const LinearWeights& lw, std::size_t c_in, std::size_t c_out, const std::string& name) {
  if (lw.w.rank() != 2 || lw.w.dim(0) != c_out || lw.w.dim(1) != c_in) {
    throw std::invalid_argument(name + ": expected weights [" + std::to_string(c_out) + ", " +
                                std::to_string(c_in) + "], got " + dims_to_string(lw.w.dims()));
  }
  try {
    lw.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(name + ": " + e.what());
  }
}

Tap spike_tap(std::string name, const EncodedSpikeMap& map) {
  const auto dense = decode(map);
  return Tap{std::move(name), std::vector<std::int32_t>(dense.bits().begin(), dense.bits().end())};
}

Tap value_tap(std::string name, const FixedTensor& x) {
  return Tap{std::move(name), std::vector<std::int32_t>(x.data().begin(), x.data().end())};
}

OpCounters* layer(const RunOptions& opts, std::string name, LayerKind kind) {
  return opts.trace ? opts.trace->begin(std::move(name), kind) : nullptr;
}

FixedTensor reshape(FixedTensor x, std::vector<std::size_t> dims) {
  std::vector<std::int32_t> data(x.data().begin(), x.data().end());
  return FixedTensor(std::move(dims), std::move(data), x.format());
}

}  // namespace

void ModelWeights::validate(const ModelConfig& cfg) const {
  const auto geo = cfg.geometry();
  if (sps.size() != geo.size()) throw std::invalid_argument("weights have the wrong number of sps stages");
  for (std::size_t i = 0; i < geo.size(); ++i) {
    const auto& cv = cfg.sps_stages[i].conv;
    check_conv(sps[i], geo[i].in_c, cv.out_channels, cv.kernel, "sps" + std::to_string(i));
    if (sps[i].stride != cv.stride || sps[i].padding != cv.padding) {
      throw std::invalid_argument("sps" + std::to_string(i) + ": stride/padding differ from config");
    }
  }
  check_conv(rpe, cfg.embed_dim, cfg.embed_dim, cfg.rpe_kernel, "rpe");
  if (rpe.stride != 1 || rpe.padding != cfg.rpe_kernel / 2) {
    throw std::invalid_argument("rpe: conv must be stride 1 with same padding");
  }
  if (blocks.size() != cfg.n_blocks) throw std::invalid_argument("weights have the wrong number of blocks");
  const std::size_t D = cfg.embed_dim, H = cfg.hidden_dim();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string p = "block" + std::to_string(b) + ".";
    const auto& bw = blocks[b];
    check_linear(bw.q, D, D, p + "q");
    check_linear(bw.k, D, D, p + "k");
    check_linear(bw.v, D, D, p + "v");
    check_linear(bw.proj, D, D, p + "proj");
    check_linear(bw.mlp_up, D, H, p + "mlp_up");
    check_linear(bw.mlp_down, H, D, p + "mlp_down");
  }
  check_linear(head, D, cfg.n_classes, "head");
}

FixedTensor lift_spikes(const EncodedSpikeMap& map, const FixedFormat& fmt) {
  const std::size_t T = map.timesteps(), C = map.channels(), L = map.tokens();
  FixedTensor out({T, C, L}, fmt);
  const std::int32_t one = quantize(1.0, fmt);
  auto d = out.mutable_data();
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < C; ++c) {
      for (Position p : map.list(t, c)) d[(t * C + c) * L + p] = one;
    }
  }
  return out;
}

EncodedSpikeMap run_sps(const FixedTensor& x, const ModelConfig& cfg, const ModelWeights& weights,
                        const RunOptions& opts) {
  cfg.validate();
  const auto geo = cfg.geometry();
  const auto expected = std::vector<std::size_t>{cfg.timesteps, cfg.in_c, cfg.in_h, cfg.in_w};
  if (x.dims() != expected) {
    throw std::invalid_argument("run_sps: input dims " + dims_to_string(x.dims()) + ", expected " +
                                dims_to_string(expected));
  }
  if (x.format() != cfg.act_format()) throw std::invalid_argument("run_sps: input is not in the activation format");
  const auto mem_fmt = cfg.act_format();
  const auto lif = cfg.lif();
  const std::size_t T = cfg.timesteps;
  const Exec plain{opts.threads, nullptr};

  FixedTensor stage_in = x;
  EncodedSpikeMap pooled;
  for (std::size_t i = 0; i < geo.size(); ++i) {
    const auto& g = geo[i];
    const std::string name = "sps" + std::to_string(i);
    const std::size_t C = cfg.sps_stages[i].conv.out_channels;
    auto mem = conv2d(stage_in, weights.sps[i], mem_fmt,
                      Exec{opts.threads, layer(opts, name + ".conv", LayerKind::Conv)});
    if (opts.taps) opts.taps->push_back(value_tap(name + ".conv", mem));
    const auto fired = encode_from_potentials(mem, lif, kSpsPosWidth, plain);
    const bool last = i + 1 == geo.size();
    pooled = spike_maxpool(fired, g.pool, last ? cfg.pos_width : kSpsPosWidth,
                           Exec{opts.threads, layer(opts, name + ".pool", LayerKind::Maxpool)});
    if (opts.taps) opts.taps->push_back(spike_tap(name + ".pool", pooled));
    if (!last) {
      stage_in = reshape(lift_spikes(pooled, kBinaryFormat), {T, C, g.pool.out_h(), g.pool.out_w()});
    }
  }

  const std::size_t D = cfg.embed_dim, th = geo.back().pool.out_h(), tw = geo.back().pool.out_w();
  const auto feat = reshape(lift_spikes(pooled, kBinaryFormat), {T, D, th, tw});
  const auto rpe = conv2d(feat, weights.rpe, mem_fmt, Exec{opts.threads, layer(opts, "sps.rpe", LayerKind::Conv)});
  const auto res = residual_add(reshape(rpe, {T, D, th * tw}), lift_spikes(pooled, mem_fmt));
  if (opts.taps) opts.taps->push_back(value_tap("sps.rpe", res));
  auto tokens = encode_from_potentials(res, lif, cfg.pos_width, plain);
  if (opts.taps) opts.taps->push_back(spike_tap("sps.out", tokens));
  return tokens;
}

EncodedSpikeMap run_sdeb(const EncodedSpikeMap& tokens, const BlockWeights& block,
                         const ModelConfig& cfg, const RunOptions& opts, const std::string& name) {
  if (tokens.channels() != cfg.embed_dim || tokens.timesteps() != cfg.timesteps) {
    throw std::invalid_argument("run_sdeb: token map shape does not match the config");
  }
  const auto mem_fmt = cfg.act_format();
  const auto lif = cfg.lif();
  const int pw = cfg.pos_width;
  auto ex = [&](const std::string& layer_name, LayerKind kind) {
    return Exec{opts.threads, layer(opts, name + "." + layer_name, kind)};
  };
  auto tap_spikes = [&](const std::string& n, const EncodedSpikeMap& m) {
    if (opts.taps) opts.taps->push_back(spike_tap(name + "." + n, m));
  };
  auto tap_values = [&](const std::string& n, const FixedTensor& v) {
    if (opts.taps) opts.taps->push_back(value_tap(name + "." + n, v));
  };

  const auto q = spike_linear_into_neuron(tokens, block.q, mem_fmt, lif, pw, ex("q", LayerKind::Linear));
  tap_spikes("q", q);
  const auto k = spike_linear_into_neuron(tokens, block.k, mem_fmt, lif, pw, ex("k", LayerKind::Linear));
  tap_spikes("k", k);
  const auto v = spike_linear_into_neuron(tokens, block.v, mem_fmt, lif, pw, ex("v", LayerKind::Linear));
  tap_spikes("v", v);
  const auto attn = sdsa(q, k, v, cfg.v_th_attn, cfg.n_heads, ex("attn", LayerKind::Attention));
  tap_spikes("attn", attn);

  const auto proj = spike_linear(attn, block.proj, mem_fmt, ex("proj", LayerKind::Linear));
  const auto res1 = residual_add(proj, lift_spikes(tokens, mem_fmt));
  tap_values("res1", res1);
  const auto x1 = encode_from_potentials(res1, lif, pw, Exec{opts.threads, nullptr});
  tap_spikes("x1", x1);

  const auto hidden = spike_linear_into_neuron(x1, block.mlp_up, mem_fmt, lif, pw, ex("mlp_up", LayerKind::Linear));
  tap_spikes("hidden", hidden);
  const auto down = spike_linear(hidden, block.mlp_down, mem_fmt, ex("mlp_down", LayerKind::Linear));
  const auto res2 = residual_add(down, lift_spikes(x1, mem_fmt));
  tap_values("res2", res2);
  auto out = encode_from_potentials(res2, lif, pw, Exec{opts.threads, nullptr});
  tap_spikes("out", out);
  return out;
}

std::int64_t div_round(std::int64_t n, std::int64_t d) {
  if (d <= 0) throw std::invalid_argument("div_round: divisor must be positive");
  const std::int64_t mag = n < 0 ? -n : n;
  const std::int64_t q = (2 * mag + d) / (2 * d);
  return n < 0 ? -q : q;
}

FixedTensor readout(std::span<const std::int64_t> counts, std::size_t timesteps, std::size_t tokens,
                    const LinearWeights& head) {
  head.validate();
  const std::size_t C = head.in_features(), K = head.out_features();
  if (counts.size() != timesteps * C) throw std::invalid_argument("readout: counts must be [T, C]");
  const auto denom = static_cast<std::int64_t>(timesteps * tokens);
  const auto fmt = accumulator_format(head.w.format().scale_exp);
  FixedTensor logits({K}, fmt);
  if (denom == 0) return logits;
  const auto w = head.w.data();
  const auto bias = head.bias.data();
  for (std::size_t k = 0; k < K; ++k) {
    std::int64_t acc = denom * bias[k];
    for (std::size_t t = 0; t < timesteps; ++t) {
      for (std::size_t c = 0; c < C; ++c) acc += std::int64_t{w[k * C + c]} * counts[t * C + c];
    }
    logits.set(k, div_round(acc, denom));
  }
  return logits;
}

FixedTensor run_model(const FixedTensor& x, const ModelConfig& cfg, const ModelWeights& weights,
                      const RunOptions& opts) {
  cfg.validate();
  weights.validate(cfg);
  auto tokens = run_sps(x, cfg, weights, opts);
  for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
    tokens = run_sdeb(tokens, weights.blocks[b], cfg, opts, "block" + std::to_string(b));
  }
  const std::size_t T = tokens.timesteps(), C = tokens.channels();
  std::vector<std::int64_t> counts(T * C);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < C; ++c) counts[t * C + c] = static_cast<std::int64_t>(tokens.list(t, c).size());
  }
  if (opts.trace) {
    auto* rc = opts.trace->begin("head", LayerKind::Readout);
    rc->executed = count_sops_linear(tokens, cfg.n_classes);
    rc->accumulates = rc->executed;
    rc->dense = T * C * tokens.tokens() * cfg.n_classes;
    rc->input_spikes = tokens.spike_count();
    rc->input_slots = tokens.slot_count();
  }
  if (opts.taps) opts.taps->push_back(Tap{"head.counts", std::vector<std::int32_t>(counts.begin(), counts.end())});
  auto logits = readout(counts, T, tokens.tokens(), weights.head);
  if (opts.taps) opts.taps->push_back(value_tap("logits", logits));
  if (opts.final_tokens) *opts.final_tokens = std::move(tokens);
  return logits;
}

}  // namespace sdt
