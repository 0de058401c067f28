// SPDX-License-Identifier: Apache-2.0
//
// SOP accounting and the peak-throughput model. One SOP is one spike
// traversing one synapse, so a spike feeding a C_out-wide linear layer is
// C_out SOPs.

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdt/counters.hpp"
#include "sdt/spike_stream.hpp"

namespace sdt {

enum class LayerKind { Conv, Maxpool, Linear, Attention, Readout };

[[nodiscard]] const char* to_string(LayerKind kind) noexcept;

struct LayerRecord {
  std::string name;
  LayerKind kind = LayerKind::Linear;
  OpCounters counters;
};

/// Collected by an instrumented model run, one record per executed layer.
struct RunTrace {
  std::deque<LayerRecord> layers;

  /// Appends a zeroed record and returns its counters. The pointer stays
  /// valid while further records are appended.
  OpCounters* begin(std::string name, LayerKind kind) {
    layers.push_back(LayerRecord{std::move(name), kind, {}});
    return &layers.back().counters;
  }
};

struct LayerStats {
  std::string name;
  LayerKind kind = LayerKind::Linear;
  std::uint64_t sop_count = 0;
  std::uint64_t dense_op_count = 0;
  std::uint64_t skipped = 0;
  double sparsity = 1.0;  // of the layer's spike input
  std::uint64_t comparator_steps = 0;
  std::uint64_t accumulates = 0;
};

struct KindSummary {
  std::size_t layers = 0;
  std::uint64_t sop_count = 0;
  std::uint64_t dense_op_count = 0;
  double mean_sparsity = 1.0;
};

struct PerfReport {
  std::vector<LayerStats> layers;
  std::map<std::string, KindSummary> by_kind;
  std::uint64_t total_sops = 0;
  std::uint64_t total_dense = 0;
};

struct HardwareModel {
  std::uint64_t lanes = 1536;
  double freq_hz = 200e6;
  std::optional<double> power_watts;

  void validate() const;
  friend bool operator==(const HardwareModel&, const HardwareModel&) = default;
};

/// Total spikes times fan-out.
[[nodiscard]] std::uint64_t count_sops_linear(const EncodedSpikeMap& map, std::uint64_t c_out) noexcept;

/// SOP/s with every lane retiring one synaptic operation per cycle.
[[nodiscard]] double peak_throughput(const HardwareModel& hw);

/// SOP/W when a power figure was supplied.
[[nodiscard]] std::optional<double> energy_efficiency(const HardwareModel& hw);

/// Lanes needed to sustain `sops_per_second` at the model's clock.
[[nodiscard]] double lanes_for_throughput(double sops_per_second, double freq_hz);

[[nodiscard]] PerfReport report(const RunTrace& trace);

/// JSON document with a "layers" array, per-kind summary and hardware figures.
[[nodiscard]] std::string report_to_json(const PerfReport& r, const HardwareModel& hw);

/// One header row then one row per layer.
[[nodiscard]] std::string report_to_csv(const PerfReport& r);

}  // namespace sdt
