// SPDX-License-Identifier: Apache-2.0

#include "sdt/manifest.hpp"

#include <fstream>
#include <iterator>
#include <string_view>

namespace sdt {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'T', 'W'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v & 0xFF));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint16_t u16() {
    const std::uint16_t lo = u8();
    return static_cast<std::uint16_t>(lo | (std::uint16_t{u8()} << 8));
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{u8()} << (8 * i);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw ManifestError("manifest truncated at byte " + std::to_string(pos_));
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void put_conv(Manifest& m, const std::string& prefix, const ConvWeights& cw) {
  m.tensors.push_back({prefix + ".w", cw.w});
  m.tensors.push_back({prefix + ".b", cw.bias});
}

void put_linear(Manifest& m, const std::string& prefix, const LinearWeights& lw) {
  m.tensors.push_back({prefix + ".w", lw.w});
  m.tensors.push_back({prefix + ".b", lw.bias});
}

ConvWeights get_conv(const Manifest& m, const std::string& prefix, const ConvSpec& spec) {
  return ConvWeights{m.get(prefix + ".w"), m.get(prefix + ".b"), spec.stride, spec.padding};
}

LinearWeights get_linear(const Manifest& m, const std::string& prefix) {
  return LinearWeights{m.get(prefix + ".w"), m.get(prefix + ".b")};
}

}  // namespace

const FixedTensor& Manifest::get(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.tensor;
  }
  throw ManifestError("manifest has no tensor named '" + name + "'");
}

bool Manifest::contains(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return true;
  }
  return false;
}

std::vector<std::uint8_t> serialize(const Manifest& m) {
  Writer w;
  w.bytes(std::string_view(kMagic, 4));
  w.u16(kManifestVersion);
  w.u32(static_cast<std::uint32_t>(m.tensors.size()));
  for (const auto& [name, t] : m.tensors) {
    if (name.size() > 0xFFFF) throw ManifestError("tensor name too long: " + name.substr(0, 32));
    if (t.rank() > 0xFF) throw ManifestError(name + ": rank too large");
    const auto& f = t.format();
    if (f.width > 16 || !f.is_signed) throw ManifestError(name + ": only signed formats up to 16 bits can be stored");
    if (f.scale_exp < -128 || f.scale_exp > 127) throw ManifestError(name + ": scale exponent outside int8");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
    w.u8(static_cast<std::uint8_t>(t.rank()));
    for (auto d : t.dims()) {
      if (d > 0xFFFFFFFFu) throw ManifestError(name + ": dimension too large");
      w.u32(static_cast<std::uint32_t>(d));
    }
    w.u8(static_cast<std::uint8_t>(f.width));
    w.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(f.scale_exp)));
    for (auto v : t.data()) w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return w.take();
}

Manifest deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.str(4) != std::string_view(kMagic, 4)) throw ManifestError("not an SDTW manifest (bad magic)");
  const auto version = r.u16();
  if (version != kManifestVersion) {
    throw ManifestError("unsupported manifest version " + std::to_string(version));
  }
  const auto count = r.u32();
  Manifest m;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str(r.u16());
    const auto rank = r.u8();
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = r.u32();
    const int width = r.u8();
    const int scale_exp = static_cast<std::int8_t>(r.u8());
    if (width < 2 || width > 16) throw ManifestError(name + ": element width " + std::to_string(width) + " unsupported");
    const std::size_t n = element_count(dims);
    if (n > r.remaining() / 2) throw ManifestError(name + ": declared size exceeds file length");
    std::vector<std::int32_t> data(n);
    for (auto& v : data) v = static_cast<std::int16_t>(r.u16());
    try {
      m.tensors.push_back({std::move(name), FixedTensor(std::move(dims), std::move(data), {width, scale_exp, true})});
    } catch (const std::invalid_argument& e) {
      throw ManifestError(std::string("manifest tensor invalid: ") + e.what());
    }
  }
  if (r.remaining() != 0) throw ManifestError("manifest has " + std::to_string(r.remaining()) + " trailing bytes");
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  const auto bytes = serialize(m);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ManifestError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw ManifestError("write failed: " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ManifestError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return deserialize(bytes);
  } catch (const ManifestError& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }
}

Manifest to_manifest(const ModelWeights& weights) {
  Manifest m;
  for (std::size_t i = 0; i < weights.sps.size(); ++i) put_conv(m, "sps" + std::to_string(i), weights.sps[i]);
  put_conv(m, "rpe", weights.rpe);
  for (std::size_t b = 0; b < weights.blocks.size(); ++b) {
    const std::string p = "block" + std::to_string(b) + ".";
    const auto& bw = weights.blocks[b];
    put_linear(m, p + "q", bw.q);
    put_linear(m, p + "k", bw.k);
    put_linear(m, p + "v", bw.v);
    put_linear(m, p + "proj", bw.proj);
    put_linear(m, p + "mlp_up", bw.mlp_up);
    put_linear(m, p + "mlp_down", bw.mlp_down);
  }
  put_linear(m, "head", weights.head);
  return m;
}

ModelWeights weights_from_manifest(const Manifest& m, const ModelConfig& cfg) {
  ModelWeights w;
  for (std::size_t i = 0; i < cfg.sps_stages.size(); ++i) {
    w.sps.push_back(get_conv(m, "sps" + std::to_string(i), cfg.sps_stages[i].conv));
  }
  w.rpe = get_conv(m, "rpe", ConvSpec{cfg.embed_dim, cfg.rpe_kernel, 1, cfg.rpe_kernel / 2});
  for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
    const std::string p = "block" + std::to_string(b) + ".";
    w.blocks.push_back(BlockWeights{get_linear(m, p + "q"), get_linear(m, p + "k"), get_linear(m, p + "v"),
                                    get_linear(m, p + "proj"), get_linear(m, p + "mlp_up"),
                                    get_linear(m, p + "mlp_down")});
  }
  w.head = get_linear(m, "head");
  w.validate(cfg);
  return w;
}

Manifest input_manifest(const FixedTensor& x) { return Manifest{{NamedTensor{"input", x}}}; }

}  // namespace sdt
