// SPDX-License-Identifier: Apache-2.0
//
// Binary tensor container ("SDTW"), little-endian throughout:
//
//   magic "SDTW" | version u16 | tensor count u32
//   per tensor: name length u16, UTF-8 name, rank u8, dims u32 x rank,
//               element width u8, scale exponent i8, elements i16 x N

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdt/fixedpoint.hpp"
#include "sdt/model.hpp"

namespace sdt {

inline constexpr std::uint16_t kManifestVersion = 1;

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  FixedTensor tensor;
};

struct Manifest {
  std::vector<NamedTensor> tensors;

  /// Throws ManifestError if no tensor has this name.
  [[nodiscard]] const FixedTensor& get(const std::string& name) const;
  [[nodiscard]] bool contains(const std::string& name) const;
};

/// Throws ManifestError for widths above 16 bits or elements that do not
/// fit in int16.
[[nodiscard]] std::vector<std::uint8_t> serialize(const Manifest& m);
/// Throws ManifestError on bad magic, version, truncation or trailing bytes.
[[nodiscard]] Manifest deserialize(std::span<const std::uint8_t> bytes);

void write_manifest(const std::filesystem::path& path, const Manifest& m);
[[nodiscard]] Manifest read_manifest(const std::filesystem::path& path);

/// Tensor names: sps<i>.w/.b, rpe.w/.b, block<b>.<q|k|v|proj|mlp_up|mlp_down>.w/.b, head.w/.b.
[[nodiscard]] Manifest to_manifest(const ModelWeights& weights);
/// Strides and padding come from the config. Throws ManifestError on a
/// missing tensor and std::invalid_argument on a shape mismatch.
[[nodiscard]] ModelWeights weights_from_manifest(const Manifest& m, const ModelConfig& cfg);

/// Single tensor named "input".
[[nodiscard]] Manifest input_manifest(const FixedTensor& x);

}  // namespace sdt
