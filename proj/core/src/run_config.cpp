// SPDX-License-Identifier: Apache-2.0

#include "sdt/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace sdt {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

std::vector<SpsStage> parse_stages(const std::string& v) {
  std::vector<SpsStage> out;
  std::istringstream list(v);
  std::string item;
  while (std::getline(list, item, ',')) {
    item = trim(item);
    std::vector<std::size_t> f;
    std::istringstream fields(item);
    std::string part;
    while (std::getline(fields, part, ':')) f.push_back(parse_int<std::size_t>("sps_stages", trim(part)));
    if (f.size() != 6) {
      throw ConfigError("sps_stages entry '" + item +
                        "' must be out_channels:kernel:stride:padding:pool_kernel:pool_stride");
    }
    out.push_back(SpsStage{ConvSpec{f[0], f[1], f[2], f[3]}, f[4], f[5]});
  }
  if (out.empty()) throw ConfigError("sps_stages must list at least one stage");
  return out;
}

std::string format_stages(const std::vector<SpsStage>& stages) {
  std::ostringstream os;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    os << (i ? "," : "") << s.conv.out_channels << ':' << s.conv.kernel << ':' << s.conv.stride << ':'
       << s.conv.padding << ':' << s.pool_kernel << ':' << s.pool_stride;
  }
  return os.str();
}

std::string real_text(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

RunConfig RunConfig::toy() {
  RunConfig c;
  c.model = ModelConfig::toy();
  return c;
}

RunConfig parse_run_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    auto key = trim(std::string_view(line).substr(0, eq));
    auto value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    if (!kv.emplace(key, value).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }

  RunConfig cfg = RunConfig::toy();
  auto& m = cfg.model;
  using Setter = std::function<void(const std::string&)>;
  auto size_key = [](std::size_t& dst, const char* key) { return [&dst, key](const std::string& v) { dst = parse_int<std::size_t>(key, v); }; };
  auto int_key = [](int& dst, const char* key) { return [&dst, key](const std::string& v) { dst = parse_int<int>(key, v); }; };
  auto real_key = [](double& dst, const char* key) { return [&dst, key](const std::string& v) { dst = parse_real(key, v); }; };
  const std::map<std::string, Setter> required = {
      {"timesteps", size_key(m.timesteps, "timesteps")},
      {"in_channels", size_key(m.in_c, "in_channels")},
      {"in_height", size_key(m.in_h, "in_height")},
      {"in_width", size_key(m.in_w, "in_width")},
      {"sps_stages", [&](const std::string& v) { m.sps_stages = parse_stages(v); }},
      {"embed_dim", size_key(m.embed_dim, "embed_dim")},
      {"n_blocks", size_key(m.n_blocks, "n_blocks")},
      {"n_classes", size_key(m.n_classes, "n_classes")},
  };
  const std::map<std::string, Setter> optional = {
      {"rpe_kernel", size_key(m.rpe_kernel, "rpe_kernel")},
      {"n_heads", size_key(m.n_heads, "n_heads")},
      {"mlp_ratio", size_key(m.mlp_ratio, "mlp_ratio")},
      {"v_th", real_key(m.v_th, "v_th")},
      {"v_reset", real_key(m.v_reset, "v_reset")},
      {"gamma", real_key(m.gamma, "gamma")},
      {"v_th_attn", [&](const std::string& v) { m.v_th_attn = parse_int<std::int64_t>("v_th_attn", v); }},
      {"act_width", int_key(m.act_width, "act_width")},
      {"act_scale_exp", int_key(m.act_scale_exp, "act_scale_exp")},
      {"weight_width", int_key(m.weight_width, "weight_width")},
      {"pos_width", int_key(m.pos_width, "pos_width")},
      {"seed", [&](const std::string& v) { cfg.seed = parse_int<std::uint64_t>("seed", v); }},
      {"threads", [&](const std::string& v) { cfg.threads = parse_int<unsigned>("threads", v); }},
      {"lanes", [&](const std::string& v) { cfg.hw.lanes = parse_int<std::uint64_t>("lanes", v); }},
      {"freq_hz", real_key(cfg.hw.freq_hz, "freq_hz")},
      {"power_watts", [&](const std::string& v) { cfg.hw.power_watts = parse_real("power_watts", v); }},
  };
  for (const auto& [key, value] : kv) {
    if (auto it = required.find(key); it != required.end()) {
      it->second(value);
    } else if (auto jt = optional.find(key); jt != optional.end()) {
      jt->second(value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  for (const auto& [key, _] : required) {
    if (!kv.contains(key)) throw ConfigError("missing required config key '" + key + "'");
  }
  try {
    m.validate();
    cfg.hw.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  if (cfg.threads == 0) throw ConfigError("threads must be >= 1");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_run_config(const RunConfig& cfg) {
  const auto& m = cfg.model;
  std::ostringstream os;
  os << "timesteps = " << m.timesteps << '\n'
     << "in_channels = " << m.in_c << '\n'
     << "in_height = " << m.in_h << '\n'
     << "in_width = " << m.in_w << '\n'
     << "sps_stages = " << format_stages(m.sps_stages) << '\n'
     << "rpe_kernel = " << m.rpe_kernel << '\n'
     << "embed_dim = " << m.embed_dim << '\n'
     << "n_blocks = " << m.n_blocks << '\n'
     << "n_heads = " << m.n_heads << '\n'
     << "mlp_ratio = " << m.mlp_ratio << '\n'
     << "n_classes = " << m.n_classes << '\n'
     << "v_th = " << real_text(m.v_th) << '\n'
     << "v_reset = " << real_text(m.v_reset) << '\n'
     << "gamma = " << real_text(m.gamma) << '\n'
     << "v_th_attn = " << m.v_th_attn << '\n'
     << "act_width = " << m.act_width << '\n'
     << "act_scale_exp = " << m.act_scale_exp << '\n'
     << "weight_width = " << m.weight_width << '\n'
     << "pos_width = " << m.pos_width << '\n'
     << "seed = " << cfg.seed << '\n'
     << "threads = " << cfg.threads << '\n'
     << "lanes = " << cfg.hw.lanes << '\n'
     << "freq_hz = " << real_text(cfg.hw.freq_hz) << '\n';
  if (cfg.hw.power_watts) os << "power_watts = " << real_text(*cfg.hw.power_watts) << '\n';
  return os.str();
}

}  // namespace sdt
