// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <json.hpp>

#include "sdt/attention.hpp"
#include "sdt/generate.hpp"
#include "sdt/linear.hpp"
#include "sdt/model.hpp"
#include "sdt/perf.hpp"
#include "sdt/pooling.hpp"
#include "support.hpp"

namespace sdt {
namespace {

constexpr FixedFormat kMem{10, -6, true};

TEST(PeakThroughput, LaneTimesClock) {
  EXPECT_EQ(peak_throughput(HardwareModel{1536, 200e6, {}}), 307.2e9);
  EXPECT_EQ(peak_throughput(HardwareModel{1, 1.0, {}}), 1.0);
  EXPECT_THROW((void)peak_throughput(HardwareModel{0, 1.0, {}}), std::invalid_argument);
  EXPECT_THROW((void)peak_throughput(HardwareModel{1, 0.0, {}}), std::invalid_argument);
}

TEST(LanesForThroughput, CompetitorRowArithmetic) {
  EXPECT_NEAR(lanes_for_throughput(22.6e9, 200e6), 113.0, 1e-9);
}

TEST(EnergyEfficiency, OnlyWithPower) {
  EXPECT_FALSE(energy_efficiency(HardwareModel{}).has_value());
  EXPECT_EQ(*energy_efficiency(HardwareModel{1536, 200e6, 12.0}), 307.2e9 / 12.0);
}

TEST(CountSops, SpikesTimesFanOut) {
  EncodedSpikeMap m(1, 2, 8);
  m.assign(0, 0, {1, 2, 3});
  m.assign(0, 1, {0, 7});
  EXPECT_EQ(count_sops_linear(m, 8), 40u);
  EXPECT_EQ(count_sops_linear(EncodedSpikeMap(1, 2, 8), 8), 0u);
}

TEST(CountSops, MatchesDecodedEnumeration) {
  Rng rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = testing::random_spikes(rng, {2, 6, 30}, rng.uniform());
    std::uint64_t nz = 0;
    for (std::size_t i = 0; i < x.size(); ++i) nz += x[i];
    ASSERT_EQ(count_sops_linear(encode(x), 13), nz * 13);
  }
}

RunTrace spike_layers(const EncodedSpikeMap& m) {
  Rng rng(72);
  RunTrace trace;
  const auto lw = testing::random_linear(rng, m.channels(), 8);
  (void)spike_linear(m, lw, kMem, Exec{1, trace.begin("lin", LayerKind::Linear)});
  (void)spike_maxpool(m, PoolSpec{2, 2, 2, 2, 4, 4}, 0, Exec{1, trace.begin("pool", LayerKind::Maxpool)});
  (void)sdsa(m, m, m, 1, 1, Exec{1, trace.begin("attn", LayerKind::Attention)});
  return trace;
}

TEST(Report, EmptyInputHasNoWork) {
  const auto r = report(spike_layers(EncodedSpikeMap(2, 4, 16)));
  ASSERT_EQ(r.layers.size(), 3u);
  for (const auto& s : r.layers) {
    EXPECT_EQ(s.sop_count, 0u) << s.name;
    EXPECT_EQ(s.sparsity, 1.0) << s.name;
    EXPECT_EQ(s.skipped, s.dense_op_count);
  }
  EXPECT_EQ(r.total_sops, 0u);
}

TEST(Report, FullInputSkipsNothing) {
  SpikeTensor full({2, 4, 16});
  for (std::size_t i = 0; i < full.size(); ++i) full.set(i, true);
  const auto r = report(spike_layers(encode(full)));
  for (const auto& s : r.layers) {
    EXPECT_EQ(s.skipped, 0u) << s.name;
    EXPECT_EQ(s.sparsity, 0.0) << s.name;
  }
}

TEST(Report, CountersAreConservedOnModelRun) {
  const auto cfg = ModelConfig::toy();
  RunTrace trace;
  (void)run_model(random_input(cfg, 9), cfg, random_weights(cfg, 9), RunOptions{1, &trace, nullptr});
  const auto r = report(trace);
  ASSERT_EQ(r.layers.size(), 2 * cfg.sps_stages.size() + 1 + 7 * cfg.n_blocks + 1);
  std::uint64_t total = 0;
  for (const auto& s : r.layers) {
    EXPECT_EQ(s.sop_count + s.skipped, s.dense_op_count) << s.name;
    EXPECT_GE(s.sparsity, 0.0);
    EXPECT_LE(s.sparsity, 1.0);
    total += s.sop_count;
  }
  EXPECT_EQ(total, r.total_sops);
  EXPECT_EQ(r.by_kind.at("linear").layers, 6 * cfg.n_blocks);
}

TEST(Report, JsonAndCsvShapes) {
  const auto r = report(spike_layers(EncodedSpikeMap(1, 4, 16)));
  const auto doc = nlohmann::json::parse(report_to_json(r, HardwareModel{1536, 200e6, 12.0}));
  EXPECT_EQ(doc["layers"].size(), 3u);
  EXPECT_EQ(doc["hardware"]["peak_gsop_per_s"].get<double>(), 307.2);
  EXPECT_TRUE(doc["hardware"].contains("gsop_per_w"));
  EXPECT_FALSE(nlohmann::json::parse(report_to_json(r, HardwareModel{}))["hardware"].contains("gsop_per_w"));

  const auto csv = report_to_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "name,kind,sop_count,dense_op_count,skipped,sparsity,comparator_steps,accumulates");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

}  // namespace
}  // namespace sdt
