// SPDX-License-Identifier: Apache-2.0
//
// Plain-text `key = value` run configuration. `#` starts a comment. Unknown
// and duplicate keys are rejected; every key without a default must appear.
//
//   required: timesteps in_channels in_height in_width sps_stages embed_dim
//             n_blocks n_classes
//   optional: rpe_kernel n_heads mlp_ratio v_th v_reset gamma v_th_attn
//             act_width act_scale_exp weight_width pos_width seed threads
//             lanes freq_hz power_watts
//
// sps_stages is a comma-separated list of
// `out_channels:kernel:stride:padding:pool_kernel:pool_stride`.

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "sdt/model.hpp"
#include "sdt/perf.hpp"

namespace sdt {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ModelConfig model;
  HardwareModel hw;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  /// The toy model with the 1536-lane, 200 MHz hardware model.
  static RunConfig toy();
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError naming the offending line or key.
[[nodiscard]] RunConfig parse_run_config(const std::string& text);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical text form; parse_run_config(format_run_config(c)) reproduces c.
[[nodiscard]] std::string format_run_config(const RunConfig& cfg);

}  // namespace sdt
