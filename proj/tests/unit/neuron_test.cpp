// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "sdt/neuron.hpp"
#include "support.hpp"

namespace sdt {
namespace {

// Membrane format fine enough that 0.1-step inputs and their halvings stay exact.
constexpr FixedFormat kFine{16, -10, true};
constexpr FixedFormat kMem{10, -6, true};

FixedTensor scalar(double v, const FixedFormat& f) { return FixedTensor({1}, {quantize(v, f)}, f); }

TEST(Decay, FromRealIsExactDyadic) {
  EXPECT_EQ(Decay::from_real(0.5), (Decay{1, 1}));
  EXPECT_EQ(Decay::from_real(0.75).value(), 0.75);
  EXPECT_EQ(Decay::from_real(0.0).value(), 0.0);
  EXPECT_EQ(Decay::from_real(1.0).value(), 1.0);
  EXPECT_THROW((void)Decay::from_real(0.1), std::invalid_argument);
  EXPECT_THROW((void)Decay::from_real(1.5), std::invalid_argument);
}

TEST(LifParams, ThresholdMustExceedReset) {
  EXPECT_THROW((void)LifParams::from_real(0.0, 0.0, 0.5, kMem), std::invalid_argument);
  const auto p = LifParams::from_real(1.0, 0.0, 0.5, kMem);
  EXPECT_EQ(p.v_th, 64);
  EXPECT_EQ(p.v_reset, 0);
}

TEST(LifStep, TwoStepExample) {
  const auto p = LifParams::from_real(1.0, 0.0, 0.5, kFine);
  auto state = LifState::fresh({1}, kFine);

  auto [s1, st1] = lif_step(state, scalar(0.6, kFine), p);
  EXPECT_FALSE(s1[0]);
  // Mem = 0.6, Temp = 0.3 in exact arithmetic; compare to the quantized value.
  EXPECT_NEAR(dequantize(st1.temp_prev[0], kFine), 0.3, 1.0 / 1024);
  EXPECT_EQ(st1.t, 1u);

  auto [s2, st2] = lif_step(st1, scalar(0.8, kFine), p);
  EXPECT_TRUE(s2[0]);  // Mem = 1.1 >= 1.0
  EXPECT_EQ(st2.temp_prev[0], 0);
}

TEST(LifStep, FiresAtExactThreshold) {
  const auto p = LifParams::from_real(1.0, -0.25, 0.5, kMem);
  auto [s, st] = lif_step(LifState::fresh({1}, kMem), FixedTensor({1}, {p.v_th}, kMem), p);
  EXPECT_TRUE(s[0]);
  EXPECT_EQ(st.temp_prev[0], p.v_reset);
}

TEST(LifStep, ZeroInputNeverFires) {
  const auto p = LifParams::from_real(1.0, 0.0, 0.5, kMem);
  const FixedTensor zero({8}, kMem);
  std::vector<FixedTensor> seq(50, zero);
  for (const auto& s : lif_run(seq, p)) EXPECT_EQ(s.count(), 0u);
}

TEST(LifStep, RejectsShapeMismatch) {
  const auto p = LifParams::from_real(1.0, 0.0, 0.5, kMem);
  EXPECT_THROW((void)lif_step(LifState::fresh({2}, kMem), FixedTensor({3}, kMem), p), std::invalid_argument);
}

TEST(LifRun, EmptySequence) {
  const auto p = LifParams::from_real(1.0, 0.0, 0.5, kMem);
  EXPECT_TRUE(lif_run({}, p).empty());
}

TEST(LifRun, SingleStepEqualsLifStep) {
  Rng rng(5);
  const auto p = LifParams::from_real(1.0, 0.0, 0.5, kMem);
  const auto x = testing::random_fixed(rng, {64}, kMem);
  const auto run = lif_run(std::span(&x, 1), p);
  ASSERT_EQ(run.size(), 1u);
  EXPECT_EQ(run[0], lif_step(LifState::fresh({64}, kMem), x, p).first);
}

// Scalar oracle written from the neuron equations, in 64-bit arithmetic.
std::vector<bool> scalar_lif(const std::vector<std::int32_t>& spa, std::int64_t v_th, std::int64_t v_reset,
                             std::int64_t g, int k, const FixedFormat& f) {
  std::vector<bool> out;
  std::int64_t temp = 0;
  for (auto x : spa) {
    const std::int64_t mem = std::clamp<std::int64_t>(x + temp, f.min_value(), f.max_value());
    const bool fire = mem >= v_th;
    out.push_back(fire);
    if (fire) {
      temp = v_reset;
    } else {
      const std::int64_t prod = g * mem;
      const std::int64_t half = std::int64_t{1} << (k - 1);
      const std::int64_t mag = ((prod < 0 ? -prod : prod) + half) >> k;
      temp = prod < 0 ? -mag : mag;
    }
  }
  return out;
}

TEST(LifRun, MatchesScalarOracle) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::int32_t g = static_cast<std::int32_t>(rng.below(9));
    const auto p = LifParams{static_cast<std::int32_t>(rng.below(200)) + 1, -static_cast<std::int32_t>(rng.below(64)),
                             Decay{g, 3}};
    std::vector<FixedTensor> seq;
    std::vector<std::vector<std::int32_t>> per_neuron(16);
    for (int t = 0; t < 6; ++t) {
      auto x = testing::random_fixed(rng, {16}, kMem);
      for (std::size_t n = 0; n < 16; ++n) per_neuron[n].push_back(x[n]);
      seq.push_back(std::move(x));
    }
    const auto got = lif_run(seq, p);
    for (std::size_t n = 0; n < 16; ++n) {
      const auto want = scalar_lif(per_neuron[n], p.v_th, p.v_reset, g, 3, kMem);
      for (std::size_t t = 0; t < want.size(); ++t) ASSERT_EQ(got[t][n], want[t]) << trial << ' ' << n << ' ' << t;
    }
  }
}

TEST(LifRun, GammaZeroIsMemoryless) {
  Rng rng(7);
  const auto p = LifParams::from_real(1.0, 0.0, 0.0, kMem);
  std::vector<FixedTensor> seq;
  for (int t = 0; t < 5; ++t) seq.push_back(testing::random_fixed(rng, {32}, kMem));
  const auto got = lif_run(seq, p);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    for (std::size_t n = 0; n < 32; ++n) ASSERT_EQ(got[t][n], seq[t][n] >= p.v_th);
  }
}

TEST(SplitTimesteps, SlicesLeadingAxis) {
  const FixedTensor x({2, 3}, {1, 2, 3, 4, 5, 6}, kMem);
  const auto parts = split_timesteps(x);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[1], FixedTensor({3}, {4, 5, 6}, kMem));
}

}  // namespace
}  // namespace sdt
