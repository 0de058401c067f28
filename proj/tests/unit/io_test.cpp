// SPDX-License-Identifier: Apache-2.0
//
// Weight manifest and run-config files.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "sdt/generate.hpp"
#include "sdt/manifest.hpp"
#include "sdt/run_config.hpp"

namespace sdt {
namespace {

TEST(Manifest, ByteLayout) {
  Manifest m{{NamedTensor{"ab", FixedTensor({2}, {1, -2}, {10, -3, true})}}};
  const auto bytes = serialize(m);
  const std::vector<std::uint8_t> want{'S', 'D', 'T', 'W', 1, 0, 1, 0, 0, 0, 2, 0, 'a', 'b', 1,
                                       2,   0,   0,   0,   10, 0xFD, 1, 0, 0xFE, 0xFF};
  EXPECT_EQ(bytes, want);
}

TEST(Manifest, RoundTripModelWeights) {
  const auto cfg = ModelConfig::toy();
  const auto w = random_weights(cfg, 3);
  const auto m = deserialize(serialize(to_manifest(w)));
  const auto back = weights_from_manifest(m, cfg);
  EXPECT_EQ(serialize(to_manifest(back)), serialize(to_manifest(w)));
  EXPECT_TRUE(m.contains("block1.mlp_down.w"));
  EXPECT_EQ(m.get("sps0.w").dims(), (std::vector<std::size_t>{32, 3, 3, 3}));
}

TEST(Manifest, GeneratedWeightsAreTenBit) {
  const auto m = to_manifest(random_weights(ModelConfig::toy(), 4));
  for (const auto& [name, t] : m.tensors) {
    if (name.ends_with(".w")) {
      EXPECT_EQ(t.format().width, 10) << name;
      for (auto v : t.data()) ASSERT_TRUE(v >= -512 && v <= 511) << name;
    }
  }
}

TEST(Manifest, RejectsCorruption) {
  auto bytes = serialize(to_manifest(random_weights(ModelConfig::toy(), 5)));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW((void)deserialize(bad_magic), ManifestError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW((void)deserialize(bad_version), ManifestError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW((void)deserialize(truncated), ManifestError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW((void)deserialize(trailing), ManifestError);
}

TEST(Manifest, RejectsWrongShapesForConfig) {
  auto cfg = ModelConfig::toy();
  const auto m = to_manifest(random_weights(cfg, 6));
  cfg.n_classes = 11;
  EXPECT_THROW((void)weights_from_manifest(m, cfg), std::invalid_argument);
  cfg = ModelConfig::toy();
  cfg.n_blocks = 3;
  EXPECT_THROW((void)weights_from_manifest(m, cfg), ManifestError);
}

TEST(Manifest, FileIoReportsPath) {
  const auto path = std::filesystem::temp_directory_path() / "sdt_io_test_missing.bin";
  std::filesystem::remove(path);
  try {
    (void)read_manifest(path);
    FAIL();
  } catch (const ManifestError& e) {
    EXPECT_NE(std::string(e.what()).find(path.string()), std::string::npos);
  }
}

TEST(RunConfig, FormatParseRoundTrip) {
  auto cfg = RunConfig::toy();
  cfg.seed = 77;
  cfg.hw.power_watts = 12.5;
  cfg.model.gamma = 0.25;
  EXPECT_EQ(parse_run_config(format_run_config(cfg)), cfg);
  EXPECT_EQ(parse_run_config(format_run_config(RunConfig::toy())), RunConfig::toy());
}

TEST(RunConfig, CommentsAndWhitespace) {
  const auto text = format_run_config(RunConfig::toy()) + "\n  # trailing comment\n";
  EXPECT_EQ(parse_run_config(text), RunConfig::toy());
}

TEST(RunConfig, RejectsUnknownDuplicateAndMissing) {
  const auto base = format_run_config(RunConfig::toy());
  EXPECT_THROW((void)parse_run_config(base + "colour = red\n"), ConfigError);
  EXPECT_THROW((void)parse_run_config(base + "seed = 3\n"), ConfigError);
  EXPECT_THROW((void)parse_run_config("timesteps = 4\n"), ConfigError);
  EXPECT_THROW((void)parse_run_config(base + "garbage line\n"), ConfigError);
}

TEST(RunConfig, RejectsInvalidValues) {
  auto with = [](const std::string& key, const std::string& value) {
    std::string text = format_run_config(RunConfig::toy());
    const auto pos = text.find(key + " = ");
    const auto end = text.find('\n', pos);
    return text.replace(pos, end - pos, key + " = " + value);
  };
  EXPECT_THROW((void)parse_run_config(with("timesteps", "-1")), ConfigError);
  EXPECT_THROW((void)parse_run_config(with("gamma", "0.3")), ConfigError);
  EXPECT_THROW((void)parse_run_config(with("n_heads", "3")), ConfigError);
  EXPECT_THROW((void)parse_run_config(with("sps_stages", "32:3:1")), ConfigError);
  EXPECT_THROW((void)parse_run_config(with("lanes", "0")), ConfigError);
  EXPECT_THROW((void)parse_run_config(with("embed_dim", "12x")), ConfigError);
}

TEST(RunConfig, ShippedToyConfigMatchesBuiltIn) {
  EXPECT_EQ(load_run_config(SDT_SOURCE_DIR "/configs/toy.cfg"), RunConfig::toy());
}

}  // namespace
}  // namespace sdt
