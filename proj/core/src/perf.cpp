// SPDX-License-Identifier: Apache-2.0

#include "sdt/perf.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sdt {

const char* to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Maxpool: return "maxpool";
    case LayerKind::Linear: return "linear";
    case LayerKind::Attention: return "attention";
    case LayerKind::Readout: return "readout";
  }
  return "unknown";
}

void HardwareModel::validate() const {
  if (lanes < 1) throw std::invalid_argument("hardware model needs at least one lane");
  if (!(freq_hz > 0.0)) throw std::invalid_argument("hardware clock must be positive");
  if (power_watts && !(*power_watts > 0.0)) throw std::invalid_argument("power must be positive");
}

std::uint64_t count_sops_linear(const EncodedSpikeMap& map, std::uint64_t c_out) noexcept {
  return static_cast<std::uint64_t>(map.spike_count()) * c_out;
}

double peak_throughput(const HardwareModel& hw) {
  hw.validate();
  return static_cast<double>(hw.lanes) * hw.freq_hz;
}

std::optional<double> energy_efficiency(const HardwareModel& hw) {
  if (!hw.power_watts) return std::nullopt;
  return peak_throughput(hw) / *hw.power_watts;
}

double lanes_for_throughput(double sops_per_second, double freq_hz) {
  if (!(freq_hz > 0.0)) throw std::invalid_argument("clock must be positive");
  return sops_per_second / freq_hz;
}

PerfReport report(const RunTrace& trace) {
  PerfReport r;
  std::map<std::string, double> sparsity_sum;
  for (const auto& rec : trace.layers) {
    const auto& c = rec.counters;
    LayerStats s;
    s.name = rec.name;
    s.kind = rec.kind;
    s.sop_count = c.executed;
    s.dense_op_count = c.dense;
    s.skipped = c.dense >= c.executed ? c.dense - c.executed : 0;
    s.sparsity = c.input_slots == 0 ? 1.0
                                    : 1.0 - static_cast<double>(c.input_spikes) /
                                                static_cast<double>(c.input_slots);
    s.comparator_steps = c.comparator_steps;
    s.accumulates = c.accumulates;
    r.total_sops += s.sop_count;
    r.total_dense += s.dense_op_count;

    auto& k = r.by_kind[to_string(rec.kind)];
    ++k.layers;
    k.sop_count += s.sop_count;
    k.dense_op_count += s.dense_op_count;
    sparsity_sum[to_string(rec.kind)] += s.sparsity;
    r.layers.push_back(std::move(s));
  }
  for (auto& [name, k] : r.by_kind) k.mean_sparsity = sparsity_sum[name] / static_cast<double>(k.layers);
  return r;
}

std::string report_to_json(const PerfReport& r, const HardwareModel& hw) {
  nlohmann::ordered_json doc;
  auto& layers = doc["layers"] = nlohmann::ordered_json::array();
  for (const auto& s : r.layers) {
    layers.push_back({{"name", s.name},
                      {"kind", to_string(s.kind)},
                      {"sop_count", s.sop_count},
                      {"dense_op_count", s.dense_op_count},
                      {"skipped", s.skipped},
                      {"sparsity", s.sparsity},
                      {"comparator_steps", s.comparator_steps},
                      {"accumulates", s.accumulates}});
  }
  auto& kinds = doc["by_kind"] = nlohmann::ordered_json::object();
  for (const auto& [name, k] : r.by_kind) {
    kinds[name] = {{"layers", k.layers},
                   {"sop_count", k.sop_count},
                   {"dense_op_count", k.dense_op_count},
                   {"mean_sparsity", k.mean_sparsity}};
  }
  doc["total_sops"] = r.total_sops;
  doc["total_dense_ops"] = r.total_dense;
  doc["hardware"] = {{"lanes", hw.lanes},
                     {"freq_hz", hw.freq_hz},
                     {"peak_sop_per_s", peak_throughput(hw)},
                     {"peak_gsop_per_s", peak_throughput(hw) / 1e9}};
  if (auto eff = energy_efficiency(hw)) {
    doc["hardware"]["power_watts"] = *hw.power_watts;
    doc["hardware"]["gsop_per_w"] = *eff / 1e9;
  }
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const PerfReport& r) {
  std::ostringstream os;
  os << "name,kind,sop_count,dense_op_count,skipped,sparsity,comparator_steps,accumulates\n";
  for (const auto& s : r.layers) {
    char sp[32];
    std::snprintf(sp, sizeof sp, "%.6f", s.sparsity);
    os << s.name << ',' << to_string(s.kind) << ',' << s.sop_count << ',' << s.dense_op_count << ','
       << s.skipped << ',' << sp << ',' << s.comparator_steps << ',' << s.accumulates << '\n';
  }
  return os.str();
}

}  // namespace sdt
