// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdt/fixedpoint.hpp"
#include "support.hpp"

namespace sdt {
namespace {

constexpr FixedFormat kQ10{10, -3, true};

TEST(FixedFormat, RangeOfTenBitSigned) {
  EXPECT_EQ(kQ10.min_value(), -512);
  EXPECT_EQ(kQ10.max_value(), 511);
  EXPECT_TRUE(kQ10.contains(511));
  EXPECT_FALSE(kQ10.contains(512));
}

TEST(FixedFormat, RejectsBadWidths) {
  EXPECT_THROW((FixedFormat{1, 0, true}.validate()), std::invalid_argument);
  EXPECT_THROW((FixedFormat{33, 0, true}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((FixedFormat{32, 0, true}.validate()));
}

TEST(Quantize, HalfAtScaleMinusThree) { EXPECT_EQ(quantize(0.5, kQ10), 4); }

TEST(Quantize, RoundsHalfAwayFromZero) {
  // 1/16 at scale 2^-3 is exactly half a step.
  EXPECT_EQ(quantize(0.0625, kQ10), 1);
  EXPECT_EQ(quantize(-0.0625, kQ10), -1);
  EXPECT_EQ(quantize(0.06, kQ10), 0);
}

TEST(Quantize, Saturates) {
  EXPECT_EQ(quantize(1000.0, kQ10), 511);
  EXPECT_EQ(quantize(-1000.0, kQ10), -512);
  EXPECT_EQ(quantize(std::numeric_limits<double>::infinity(), kQ10), 511);
}

TEST(Quantize, MonotoneOnAFineSweep) {
  std::int32_t prev = quantize(-80.0, kQ10);
  for (double x = -80.0; x <= 80.0; x += 0.001) {
    const auto q = quantize(x, kQ10);
    ASSERT_GE(q, prev) << x;
    prev = q;
  }
}

TEST(Dequantize, InvertsQuantizeOnGrid) {
  for (std::int64_t v = kQ10.min_value(); v <= kQ10.max_value(); ++v) {
    ASSERT_EQ(quantize(dequantize(v, kQ10), kQ10), v);
  }
}

TEST(SatNarrow, ClampsAndPassesThrough) {
  EXPECT_EQ(sat_narrow(17, kQ10), 17);
  EXPECT_EQ(sat_narrow(100000, kQ10), 511);
  EXPECT_EQ(sat_narrow(-100000, kQ10), -512);
  EXPECT_EQ(sat_narrow(std::numeric_limits<std::int64_t>::min(), kQ10), -512);
}

TEST(ShiftRound, MatchesRealRounding) {
  Rng rng(3);
  for (int i = 0; i < 20000; ++i) {
    const auto v = static_cast<std::int64_t>(rng.below(1 << 20)) - (1 << 19);
    const int s = static_cast<int>(rng.below(12));
    const double exact = static_cast<double>(v) / std::ldexp(1.0, s);
    const auto expected = static_cast<std::int64_t>(std::round(exact));  // half away from zero
    ASSERT_EQ(shift_round(v, s), expected) << v << " >> " << s;
  }
}

TEST(RescaleSaturate, ShiftsBetweenScales) {
  // acc at scale 2^-8, output at 2^-6: divide by 4 with rounding.
  const FixedFormat out{10, -6, true};
  EXPECT_EQ(rescale_saturate(10, -8, out), 3);
  EXPECT_EQ(rescale_saturate(-10, -8, out), -3);
  EXPECT_EQ(rescale_saturate(1 << 20, -8, out), 511);
  // Finer output scale multiplies.
  EXPECT_EQ(rescale_saturate(5, -4, out), 20);
}

TEST(ChooseScale, LargestMaxAbsFits) {
  for (double m : {0.001, 0.3, 1.0, 1.5, 7.9, 100.0}) {
    const int e = choose_scale_exp(m, 10);
    const FixedFormat f{10, e, true};
    EXPECT_LE(std::abs(m) / std::ldexp(1.0, e), 511.5) << m;
    // One step finer would overflow.
    EXPECT_GT(std::abs(m) / std::ldexp(1.0, e - 1), 511.0) << m;
    (void)f;
  }
}

TEST(FixedTensor, ConstructionValidatesRange) {
  EXPECT_THROW(FixedTensor({2}, {0, 600}, kQ10), std::invalid_argument);
  EXPECT_THROW(FixedTensor({3}, {0, 1}, kQ10), std::invalid_argument);
  FixedTensor t({2, 2}, kQ10);
  t.set(1, 9999);
  EXPECT_EQ(t[1], 511);
  EXPECT_EQ(t.size(), 4u);
}

TEST(AddElementwise, ZeroIsIdentity) {
  Rng rng(11);
  const auto x = testing::random_fixed(rng, {4, 5}, kQ10);
  EXPECT_EQ(add_elementwise(FixedTensor({4, 5}, kQ10), x), x);
}

TEST(AddElementwise, Clamps) {
  const FixedTensor a({1}, {511}, {10, 0, true});
  EXPECT_EQ(add_elementwise(a, a)[0], 511);
}

TEST(AddElementwise, MatchesScalarLoop) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = testing::random_fixed(rng, {37}, kQ10);
    const auto b = testing::random_fixed(rng, {37}, kQ10);
    const auto c = add_elementwise(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::int64_t s = std::int64_t{a[i]} + b[i];
      ASSERT_EQ(c[i], std::clamp<std::int64_t>(s, -512, 511));
    }
  }
}

TEST(AddElementwise, RejectsMismatch) {
  EXPECT_THROW((void)add_elementwise(FixedTensor({2}, kQ10), FixedTensor({3}, kQ10)), std::invalid_argument);
  EXPECT_THROW((void)add_elementwise(FixedTensor({2}, kQ10), FixedTensor({2}, FixedFormat{10, -4, true})),
               std::invalid_argument);
}

}  // namespace
}  // namespace sdt
