// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <map>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "sdt/generate.hpp"
#include "sdt/manifest.hpp"
#include "sdt/parallel.hpp"
#include "sdt/reference.hpp"
#include "sdt/spike_stream.hpp"

namespace sdt::cli {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

FixedTensor load_input(const std::filesystem::path& path, const ModelConfig& cfg) {
  const auto m = read_manifest(path);
  const auto& x = m.get("input");
  const std::vector<std::size_t> expected{cfg.timesteps, cfg.in_c, cfg.in_h, cfg.in_w};
  if (x.dims() != expected) {
    throw std::invalid_argument(path.string() + ": input dims " + dims_to_string(x.dims()) +
                                " do not match config " + dims_to_string(expected));
  }
  if (x.format() != cfg.act_format()) {
    throw std::invalid_argument(path.string() + ": input format does not match the config's activation format");
  }
  return x;
}

void print_logits(std::ostream& out, const FixedTensor& logits) {
  out << "logits:";
  for (auto v : logits.data()) out << ' ' << v;
  out << "\nlogits_real:";
  for (auto v : logits.data()) out << ' ' << dequantize(v, logits.format());
  out << '\n';
}

}  // namespace

std::optional<std::string> check_trace(const RunTrace& trace) {
  for (const auto& rec : trace.layers) {
    const auto& c = rec.counters;
    if (c.executed > c.dense) return rec.name + ": executed ops exceed the dense op count";
    if (c.input_spikes > c.input_slots) return rec.name + ": more spikes than slots";
    switch (rec.kind) {
      case LayerKind::Attention:
        if (c.comparator_steps > c.input_spikes) return rec.name + ": comparator steps exceed |Q| + |K|";
        if (c.executed != c.comparator_steps) return rec.name + ": executed != comparator steps";
        break;
      case LayerKind::Linear:
      case LayerKind::Readout:
        // accumulates = spikes * C_out and dense = slots * C_out share the fan-out.
        if (c.input_slots == 0 || c.dense % c.input_slots != 0 ||
            c.accumulates != c.input_spikes * (c.dense / c.input_slots)) {
          return rec.name + ": accumulate count is not spikes x fan-out";
        }
        break;
      case LayerKind::Maxpool:
      case LayerKind::Conv:
        break;
    }
  }
  return std::nullopt;
}

std::optional<Mismatch> compare_taps(const TapList& sparse, const TapList& dense) {
  const std::size_t n = std::min(sparse.size(), dense.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = sparse[i];
    const auto& b = dense[i];
    if (a.name != b.name) return Mismatch{0, a.name + " vs " + b.name, 0, 0, 0};
    const std::size_t m = std::min(a.values.size(), b.values.size());
    for (std::size_t j = 0; j < m; ++j) {
      if (a.values[j] != b.values[j]) return Mismatch{0, a.name, j, a.values[j], b.values[j]};
    }
    if (a.values.size() != b.values.size()) return Mismatch{0, a.name + " (length)", m, 0, 0};
  }
  if (sparse.size() != dense.size()) return Mismatch{0, "tap count", n, 0, 0};
  return std::nullopt;
}

VerifyResult verify(const RunConfig& cfg, const VerifyOptions& opts) {
  VerifyResult result;
  result.instances = opts.instances;
  std::vector<std::optional<Mismatch>> mismatches(opts.instances);
  std::vector<std::optional<std::string>> violations(opts.instances);

  parallel_for(opts.instances, cfg.threads, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seed + i;
    const auto weights = random_weights(cfg.model, seed);
    const auto input = random_input(cfg.model, seed);
    auto engine_weights = weights;
    if (opts.inject_fault) {
      auto w = engine_weights.sps.front().w.mutable_data();
      w[0] ^= 1;
    }

    RunTrace trace;
    TapList sparse_taps, dense_taps;
    const auto logits = run_model(input, cfg.model, engine_weights, RunOptions{1, &trace, &sparse_taps});
    const auto expected = reference::run_model_dense(input, cfg.model, weights, &dense_taps);

    if (auto mm = compare_taps(sparse_taps, dense_taps)) {
      mm->seed = seed;
      mismatches[i] = mm;
    } else if (logits != expected) {
      mismatches[i] = Mismatch{seed, "logits", 0, 0, 0};
    }
    if (auto v = check_trace(trace)) violations[i] = "seed " + std::to_string(seed) + ": " + *v;
  });

  for (std::size_t i = 0; i < opts.instances; ++i) {
    if (!mismatches[i] && !violations[i]) ++result.passed;
    if (mismatches[i] && !result.first_mismatch) result.first_mismatch = mismatches[i];
    if (violations[i] && !result.invariant_violation) result.invariant_violation = violations[i];
  }
  return result;
}

RunOutput run_once(const RunConfig& cfg, const ModelWeights& weights, const FixedTensor& input) {
  RunTrace trace;
  RunOutput out;
  out.logits = run_model(input, cfg.model, weights, RunOptions{cfg.threads, &trace, nullptr, &out.final_tokens});
  out.report = report(trace);
  return out;
}

std::string render_report(const PerfReport& r, const HardwareModel& hw, ReportFormat fmt) {
  return fmt == ReportFormat::Json ? report_to_json(r, hw) : report_to_csv(r);
}

int cmd_gen(const std::filesystem::path& config, std::optional<std::uint64_t> seed,
            const std::filesystem::path& weights_out, const std::optional<std::filesystem::path>& input_out,
            std::ostream& out, std::ostream& err) {
  try {
    auto cfg = load_run_config(config);
    if (seed) cfg.seed = *seed;
    write_manifest(weights_out, to_manifest(random_weights(cfg.model, cfg.seed)));
    out << "wrote weights to " << weights_out.string() << " (seed " << cfg.seed << ")\n";
    if (input_out) {
      write_manifest(*input_out, input_manifest(random_input(cfg.model, cfg.seed)));
      out << "wrote input to " << input_out->string() << '\n';
    }
    return kOk;
  } catch (const std::exception& e) {
    err << "gen: " << e.what() << '\n';
    return kUsageError;
  }
}

int cmd_run(const std::filesystem::path& config, const std::filesystem::path& weights,
            const std::filesystem::path& input, const std::optional<std::filesystem::path>& report_path,
            ReportFormat fmt, const std::optional<std::filesystem::path>& dump, std::ostream& out,
            std::ostream& err) {
  try {
    const auto cfg = load_run_config(config);
    const auto w = weights_from_manifest(read_manifest(weights), cfg.model);
    const auto x = load_input(input, cfg.model);
    const auto result = run_once(cfg, w, x);
    print_logits(out, result.logits);
    const auto text = render_report(result.report, cfg.hw, fmt);
    if (report_path) {
      write_text(*report_path, text);
    } else {
      out << text;
    }
    if (dump) write_text(*dump, format_dump(result.final_tokens));
    return kOk;
  } catch (const std::exception& e) {
    err << "run: " << e.what() << '\n';
    return kUsageError;
  }
}

int cmd_verify(const std::filesystem::path& config, std::optional<std::uint64_t> seed, std::size_t seeds,
               bool inject_fault, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config);
    if (seed) cfg.seed = *seed;
    if (seeds == 0) throw std::invalid_argument("--seeds must be >= 1");
  } catch (const std::exception& e) {
    err << "verify: " << e.what() << '\n';
    return kUsageError;
  }
  const auto result = verify(cfg, VerifyOptions{seeds, inject_fault});
  out << "verified " << result.passed << "/" << result.instances << " instances (seeds " << cfg.seed
      << ".." << cfg.seed + seeds - 1 << ")\n";
  if (const auto& m = result.first_mismatch) {
    out << "MISMATCH seed=" << m->seed << " layer=" << m->layer << " index=" << m->index
        << " sparse=" << m->sparse << " dense=" << m->dense << '\n';
  }
  if (result.invariant_violation) out << "INVARIANT " << *result.invariant_violation << '\n';
  out << (result.ok() ? "PASS" : "FAIL") << '\n';
  return result.ok() ? kOk : kVerifyFailed;
}

int cmd_stats(const std::filesystem::path& config, const std::optional<std::filesystem::path>& weights,
              const std::optional<std::filesystem::path>& input,
              const std::optional<std::filesystem::path>& report_path, ReportFormat fmt, std::ostream& out,
              std::ostream& err) {
  try {
    const auto cfg = load_run_config(config);
    out << "lanes: " << cfg.hw.lanes << '\n'
        << "freq_hz: " << cfg.hw.freq_hz << '\n'
        << "peak_gsop_per_s: " << peak_throughput(cfg.hw) / 1e9 << '\n';
    if (auto eff = energy_efficiency(cfg.hw)) out << "gsop_per_w: " << *eff / 1e9 << '\n';
    out << "tokens: " << cfg.model.tokens() << " (" << cfg.model.token_h() << "x" << cfg.model.token_w() << ")\n";
    if (weights.has_value() != input.has_value()) {
      throw std::invalid_argument("--weights and --input must be given together");
    }
    if (weights) {
      const auto w = weights_from_manifest(read_manifest(*weights), cfg.model);
      const auto x = load_input(*input, cfg.model);
      const auto result = run_once(cfg, w, x);
      const auto text = render_report(result.report, cfg.hw, fmt);
      if (report_path) {
        write_text(*report_path, text);
      } else {
        out << text;
      }
    }
    return kOk;
  } catch (const std::exception& e) {
    err << "stats: " << e.what() << '\n';
    return kUsageError;
  }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Encoded-spike inference engine for a spike-driven transformer"};
  app.require_subcommand(1);

  std::string config, weights, input, report_path, dump, format = "json";
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  bool inject_fault = false;
  const std::map<std::string, ReportFormat> formats{{"json", ReportFormat::Json}, {"csv", ReportFormat::Csv}};

  auto* gen = app.add_subcommand("gen", "Write a seeded random weight manifest");
  gen->add_option("--config", config, "Run configuration")->required();
  auto* gen_seed = gen->add_option("--seed", seed, "Override the config's seed");
  gen->add_option("--weights", weights, "Output weight manifest")->required();
  gen->add_option("--input", input, "Also write a random input manifest here");

  auto* run = app.add_subcommand("run", "Run the encoded-spike engine");
  run->add_option("--config", config, "Run configuration")->required();
  run->add_option("--weights", weights, "Weight manifest")->required();
  run->add_option("--input", input, "Input manifest")->required();
  run->add_option("--report", report_path, "Write the perf report here instead of stdout");
  run->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--dump", dump, "Write the final token spike map here");

  auto* ver = app.add_subcommand("verify", "Differential check against the dense reference");
  ver->add_option("--config", config, "Run configuration")->required();
  auto* ver_seed = ver->add_option("--seed", seed, "First seed (overrides the config)");
  ver->add_option("--seeds", seeds, "Number of seeded instances")->check(CLI::PositiveNumber);
  ver->add_flag("--inject-fault", inject_fault, "Perturb one weight in the encoded engine (self-test)");

  auto* stats = app.add_subcommand("stats", "Hardware model figures and optional per-layer report");
  stats->add_option("--config", config, "Run configuration")->required();
  stats->add_option("--weights", weights, "Weight manifest");
  stats->add_option("--input", input, "Input manifest");
  stats->add_option("--report", report_path, "Write the perf report here instead of stdout");
  stats->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << e.what() << '\n' << app.help();
    return kUsageError;
  }

  auto opt = [](const std::string& s) -> std::optional<std::filesystem::path> {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
  };
  const auto fmt = formats.at(format);
  auto seed_opt = [&](const CLI::Option* o) -> std::optional<std::uint64_t> {
    if (o->count() == 0) return std::nullopt;
    return seed;
  };
  if (gen->parsed()) return cmd_gen(config, seed_opt(gen_seed), weights, opt(input), out, err);
  if (run->parsed()) return cmd_run(config, weights, input, opt(report_path), fmt, opt(dump), out, err);
  if (ver->parsed()) return cmd_verify(config, seed_opt(ver_seed), seeds, inject_fault, out, err);
  return cmd_stats(config, opt(weights), opt(input), opt(report_path), fmt, out, err);
}

}  // namespace sdt::cli
