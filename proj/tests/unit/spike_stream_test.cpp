// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "sdt/neuron.hpp"
#include "sdt/spike_stream.hpp"
#include "support.hpp"

namespace sdt {
namespace {

constexpr FixedFormat kMem{10, -6, true};

TEST(EncodedSpikeMap, CapacityIsChecked) {
  EXPECT_NO_THROW(EncodedSpikeMap(1, 1, 256, 8));
  EXPECT_THROW(EncodedSpikeMap(1, 1, 257, 8), CapacityError);
  EXPECT_THROW(EncodedSpikeMap(1, 1, 4, 17), std::invalid_argument);
}

TEST(EncodedSpikeMap, AssignRequiresStrictlyIncreasingInRange) {
  EncodedSpikeMap m(1, 2, 10);
  EXPECT_NO_THROW(m.assign(0, 1, {1, 4, 9}));
  EXPECT_THROW(m.assign(0, 0, {3, 3}), std::invalid_argument);
  EXPECT_THROW(m.assign(0, 0, {4, 2}), std::invalid_argument);
  EXPECT_THROW(m.assign(0, 0, {10}), std::invalid_argument);
  EXPECT_EQ(m.spike_count(), 3u);
}

TEST(Encode, AllZero) {
  const auto m = encode(SpikeTensor({2, 3, 16}));
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_TRUE(m.list(t, c).empty());
}

TEST(Encode, SingleSpike) {
  SpikeTensor s({1, 1, 16});
  s.set(5, true);
  const auto m = encode(s);
  ASSERT_EQ(m.list(0, 0).size(), 1u);
  EXPECT_EQ(m.list(0, 0)[0], 5);
}

TEST(Encode, RejectsTooManyTokens) { EXPECT_THROW((void)encode(SpikeTensor({1, 1, 300}), 8), CapacityError); }

TEST(Encode, FlattensSpatialDimsRowMajor) {
  SpikeTensor s({1, 1, 3, 4});
  s.set(1 * 4 + 2, true);
  const auto m = encode(s);
  EXPECT_EQ(m.tokens(), 12u);
  EXPECT_EQ(m.list(0, 0)[0], 6);
}

TEST(Decode, EmptyAndOneHot) {
  EncodedSpikeMap m(1, 2, 8);
  EXPECT_EQ(decode(m).count(), 0u);
  m.assign(0, 1, {5});
  const auto d = decode(m);
  EXPECT_EQ(d.count(), 1u);
  EXPECT_TRUE(d[8 + 5]);
}

TEST(RoundTrip, DecodeEncodeIsIdentity) {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const double rate = rng.uniform();
    const auto x = testing::random_spikes(rng, {1 + rng.below(4), 1 + rng.below(8), 1 + rng.below(256)}, rate);
    ASSERT_EQ(decode(encode(x)), x);
  }
}

TEST(RoundTrip, EncodeDecodeIsIdentity) {
  Rng rng(22);
  for (int i = 0; i < 200; ++i) {
    const auto m = testing::random_map(rng, 3, 5, 40, rng.uniform());
    ASSERT_EQ(encode(decode(m)), m);
  }
}

TEST(Encode, ParallelMatchesSequential) {
  Rng rng(23);
  const auto x = testing::random_spikes(rng, {4, 64, 64}, 0.3);
  EXPECT_EQ(encode(x, 8, Exec{4, nullptr}), encode(x));
}

TEST(EncodeFromPotentials, TwoStepExampleFiresOnSecondStep) {
  constexpr FixedFormat fine{16, -10, true};
  const auto p = LifParams::from_real(1.0, 0.0, 0.5, fine);
  const std::vector<FixedTensor> seq{FixedTensor({1, 1}, {quantize(0.6, fine)}, fine),
                                     FixedTensor({1, 1}, {quantize(0.8, fine)}, fine)};
  const auto m = encode_from_potentials(seq, p);
  EXPECT_TRUE(m.list(0, 0).empty());
  ASSERT_EQ(m.list(1, 0).size(), 1u);
  EXPECT_EQ(m.list(1, 0)[0], 0);
}

TEST(EncodeFromPotentials, EqualsEncodeOfLifRun) {
  Rng rng(24);
  const auto p = LifParams::from_real(1.0, 0.0, 0.5, kMem);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t T = 1 + rng.below(4), C = 1 + rng.below(16), L = 1 + rng.below(64);
    std::vector<FixedTensor> seq;
    for (std::size_t t = 0; t < T; ++t) seq.push_back(testing::random_fixed(rng, {C, L}, kMem));
    SpikeTensor stacked({T, C, L});
    const auto spikes = lif_run(seq, p);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < C * L; ++i) stacked.set(t * C * L + i, spikes[t][i]);
    ASSERT_EQ(encode_from_potentials(seq, p, 8, Exec{3, nullptr}), encode(stacked));

    FixedTensor tcl({T, C, L}, kMem);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < C * L; ++i) tcl.mutable_data()[t * C * L + i] = seq[t][i];
    ASSERT_EQ(encode_from_potentials(tcl, p), encode(stacked));
  }
}

TEST(EncodeFromPotentials, ZeroInputIsEmpty) {
  const auto p = LifParams::from_real(1.0, 0.0, 0.5, kMem);
  const std::vector<FixedTensor> seq(3, FixedTensor({4, 9}, kMem));
  EXPECT_EQ(encode_from_potentials(seq, p).spike_count(), 0u);
}

TEST(Sparsity, ByDefinition) {
  EncodedSpikeMap m(1, 2, 4);
  EXPECT_DOUBLE_EQ(sparsity(m), 1.0);
  m.assign(0, 0, {0, 1, 2, 3});
  EXPECT_DOUBLE_EQ(sparsity(m), 0.5);
  m.assign(0, 1, {0, 1, 2, 3});
  EXPECT_DOUBLE_EQ(sparsity(m), 0.0);
}

TEST(Dump, FormatAndParseRoundTrip) {
  EncodedSpikeMap m(2, 2, 16);
  m.assign(0, 1, {3, 7});
  m.assign(1, 0, {0});
  const auto text = format_dump(m);
  EXPECT_EQ(text, "0,0:\n0,1:3 7\n1,0:0\n1,1:\n");
  std::istringstream is(text);
  EXPECT_EQ(parse_dump(is, 2, 2, 16), m);
}

TEST(Dump, ParseRejectsGarbage) {
  for (const char* bad : {"0,0:5 3\n", "0,9:1\n", "x\n", "0,0:99\n"}) {
    std::istringstream is(bad);
    EXPECT_ANY_THROW((void)parse_dump(is, 1, 1, 16)) << bad;
  }
}

}  // namespace
}  // namespace sdt
