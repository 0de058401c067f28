// SPDX-License-Identifier: Apache-2.0
//
// Implementation of the `sdt` subcommands, kept separate from main() so the
// tests can drive them directly.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdt/model.hpp"
#include "sdt/perf.hpp"
#include "sdt/run_config.hpp"

namespace sdt::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsageError = 2 };

enum class ReportFormat { Json, Csv };

struct Mismatch {
  std::uint64_t seed = 0;
  std::string layer;
  std::size_t index = 0;
  std::int32_t sparse = 0;
  std::int32_t dense = 0;
};

struct VerifyOptions {
  std::size_t instances = 1;
  /// Test hook: perturbs one weight of the encoded engine only.
  bool inject_fault = false;
};

struct VerifyResult {
  std::size_t instances = 0;
  std::size_t passed = 0;
  std::optional<Mismatch> first_mismatch;
  std::optional<std::string> invariant_violation;

  [[nodiscard]] bool ok() const { return passed == instances; }
};

/// Compares the encoded engine and the dense reference on `instances`
/// seeded models starting at cfg.seed. Instances run on cfg.threads workers;
/// the reported mismatch is the one with the lowest seed.
[[nodiscard]] VerifyResult verify(const RunConfig& cfg, const VerifyOptions& opts);

/// Returns a description of the first broken counter invariant, if any.
[[nodiscard]] std::optional<std::string> check_trace(const RunTrace& trace);

/// First differing tap between two runs (names are expected to align).
[[nodiscard]] std::optional<Mismatch> compare_taps(const TapList& sparse, const TapList& dense);

struct RunOutput {
  FixedTensor logits;
  PerfReport report;
  EncodedSpikeMap final_tokens;
};

[[nodiscard]] RunOutput run_once(const RunConfig& cfg, const ModelWeights& weights, const FixedTensor& input);

[[nodiscard]] std::string render_report(const PerfReport& r, const HardwareModel& hw, ReportFormat fmt);

/// `seed` overrides the config's seed when set.
int cmd_gen(const std::filesystem::path& config, std::optional<std::uint64_t> seed,
            const std::filesystem::path& weights_out, const std::optional<std::filesystem::path>& input_out,
            std::ostream& out, std::ostream& err);

int cmd_run(const std::filesystem::path& config, const std::filesystem::path& weights,
            const std::filesystem::path& input, const std::optional<std::filesystem::path>& report,
            ReportFormat fmt, const std::optional<std::filesystem::path>& dump, std::ostream& out,
            std::ostream& err);

int cmd_verify(const std::filesystem::path& config, std::optional<std::uint64_t> seed, std::size_t seeds,
               bool inject_fault, std::ostream& out, std::ostream& err);

int cmd_stats(const std::filesystem::path& config, const std::optional<std::filesystem::path>& weights,
              const std::optional<std::filesystem::path>& input,
              const std::optional<std::filesystem::path>& report, ReportFormat fmt, std::ostream& out,
              std::ostream& err);

/// Parses argv and dispatches. Returns the process exit code.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace sdt::cli
