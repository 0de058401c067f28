// SPDX-License-Identifier: Apache-2.0

#include "sdt/reference.hpp"

#include <stdexcept>
#include <string>

#include "sdt/pooling.hpp"

namespace sdt::reference {

namespace {

std::size_t trailing(const std::vector<std::size_t>& dims) {
  return element_count(std::span(dims).subspan(2));
}

FixedTensor reshape(const FixedTensor& x, std::vector<std::size_t> dims) {
  return FixedTensor(std::move(dims), std::vector<std::int32_t>(x.data().begin(), x.data().end()),
                     x.format());
}

void push(TapList* taps, std::string name, const SpikeTensor& s) {
  if (taps) taps->push_back(Tap{std::move(name), std::vector<std::int32_t>(s.bits().begin(), s.bits().end())});
}

void push(TapList* taps, std::string name, const FixedTensor& x) {
  if (taps) taps->push_back(Tap{std::move(name), std::vector<std::int32_t>(x.data().begin(), x.data().end())});
}

}  // namespace

FixedTensor dense_linear(const SpikeTensor& x, const LinearWeights& weights, const FixedFormat& out_fmt) {
  weights.validate();
  const std::size_t T = x.dim(0), C_in = x.dim(1), L = trailing(x.dims());
  const std::size_t C_out = weights.out_features();
  if (weights.in_features() != C_in) throw std::invalid_argument("dense_linear: channel mismatch");
  const auto w = weights.w.data();
  const auto b = weights.bias.data();
  const int acc_exp = weights.w.format().scale_exp;
  FixedTensor out({T, C_out, L}, out_fmt);
  auto dst = out.mutable_data();
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t o = 0; o < C_out; ++o) {
      for (std::size_t l = 0; l < L; ++l) {
        std::int64_t acc = b[o];
        for (std::size_t c = 0; c < C_in; ++c) {
          acc += std::int64_t{w[o * C_in + c]} * (x[(t * C_in + c) * L + l] ? 1 : 0);
        }
        dst[(t * C_out + o) * L + l] = rescale_saturate(acc, acc_exp, out_fmt);
      }
    }
  }
  return out;
}

SpikeTensor dense_lif(const FixedTensor& spa_t, const LifParams& params) {
  const std::vector<std::size_t> inner(spa_t.dims().begin() + 1, spa_t.dims().end());
  SpikeTensor out(spa_t.dims());
  auto state = LifState::fresh(inner, spa_t.format());
  const std::size_t step = element_count(inner);
  const auto data = spa_t.data();
  for (std::size_t t = 0; t < spa_t.dim(0); ++t) {
    FixedTensor spa(inner, std::vector<std::int32_t>(data.begin() + static_cast<std::ptrdiff_t>(t * step),
                                                     data.begin() + static_cast<std::ptrdiff_t>((t + 1) * step)),
                    spa_t.format());
    auto [s, next] = lif_step(state, spa, params);
    for (std::size_t i = 0; i < step; ++i) out.set(t * step + i, s[i]);
    state = std::move(next);
  }
  return out;
}

SpikeTensor dense_sdsa(const SpikeTensor& q, const SpikeTensor& k, const SpikeTensor& v,
                       std::int64_t v_th_attn) {
  if (q.dims() != k.dims() || q.dims() != v.dims()) throw std::invalid_argument("dense_sdsa: shape mismatch");
  const std::size_t T = q.dim(0), C = q.dim(1), L = trailing(q.dims());
  SpikeTensor out(v.dims());
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t base = (t * C + c) * L;
      std::int64_t sum = 0;
      for (std::size_t l = 0; l < L; ++l) sum += (q[base + l] ? 1 : 0) * (k[base + l] ? 1 : 0);
      const int mask = sum >= v_th_attn ? 1 : 0;
      for (std::size_t l = 0; l < L; ++l) out.set(base + l, (v[base + l] ? 1 : 0) * mask != 0);
    }
  }
  return out;
}

FixedTensor lift(const SpikeTensor& x, const FixedFormat& fmt) {
  FixedTensor out(x.dims(), fmt);
  const std::int32_t one = quantize(1.0, fmt);
  for (std::size_t i = 0; i < x.size(); ++i) out.set(i, x[i] ? one : 0);
  return out;
}

FixedTensor run_model_dense(const FixedTensor& x, const ModelConfig& cfg, const ModelWeights& weights,
                            TapList* taps) {
  cfg.validate();
  weights.validate(cfg);
  const auto geo = cfg.geometry();
  const auto mem_fmt = cfg.act_format();
  const auto lif_params = cfg.lif();
  const std::size_t T = cfg.timesteps, D = cfg.embed_dim;

  // Spiking patch splitting.
  FixedTensor stage_in = x;
  SpikeTensor pooled;
  for (std::size_t i = 0; i < geo.size(); ++i) {
    const std::string name = "sps" + std::to_string(i);
    const auto mem = conv2d(stage_in, weights.sps[i], mem_fmt);
    push(taps, name + ".conv", mem);
    const auto fired = dense_lif(mem, lif_params);
    pooled = dense_maxpool(fired, geo[i].pool);
    push(taps, name + ".pool", pooled);
    stage_in = lift(pooled, kBinaryFormat);
  }
  const std::size_t th = pooled.dim(2), tw = pooled.dim(3), L = th * tw;
  const auto rpe = conv2d(lift(pooled, kBinaryFormat), weights.rpe, mem_fmt);
  auto res = add_elementwise(reshape(rpe, {T, D, L}), reshape(lift(pooled, mem_fmt), {T, D, L}));
  push(taps, "sps.rpe", res);
  SpikeTensor tokens = dense_lif(res, lif_params);
  push(taps, "sps.out", tokens);

  // Encoder blocks.
  for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
    const std::string p = "block" + std::to_string(b) + ".";
    const auto& bw = weights.blocks[b];
    const auto q = dense_lif(dense_linear(tokens, bw.q, mem_fmt), lif_params);
    push(taps, p + "q", q);
    const auto k = dense_lif(dense_linear(tokens, bw.k, mem_fmt), lif_params);
    push(taps, p + "k", k);
    const auto v = dense_lif(dense_linear(tokens, bw.v, mem_fmt), lif_params);
    push(taps, p + "v", v);
    const auto attn = dense_sdsa(q, k, v, cfg.v_th_attn);
    push(taps, p + "attn", attn);
    const auto res1 = add_elementwise(dense_linear(attn, bw.proj, mem_fmt), lift(tokens, mem_fmt));
    push(taps, p + "res1", res1);
    const auto x1 = dense_lif(res1, lif_params);
    push(taps, p + "x1", x1);
    const auto hidden = dense_lif(dense_linear(x1, bw.mlp_up, mem_fmt), lif_params);
    push(taps, p + "hidden", hidden);
    const auto res2 = add_elementwise(dense_linear(hidden, bw.mlp_down, mem_fmt), lift(x1, mem_fmt));
    push(taps, p + "res2", res2);
    tokens = dense_lif(res2, lif_params);
    push(taps, p + "out", tokens);
  }

  // Readout over spike counts.
  std::vector<std::int64_t> counts(T * D, 0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < D; ++c) {
      for (std::size_t l = 0; l < L; ++l) counts[t * D + c] += tokens[(t * D + c) * L + l] ? 1 : 0;
    }
  }
  if (taps) taps->push_back(Tap{"head.counts", std::vector<std::int32_t>(counts.begin(), counts.end())});
  auto logits = readout(counts, T, L, weights.head);
  push(taps, "logits", logits);
  return logits;
}

}  // namespace sdt::reference
