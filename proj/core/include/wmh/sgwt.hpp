#pragma once

// SGWT weights container:
//   bytes 0-3   magic "SGWT"
//   bytes 4-7   version, u32 little-endian (= 1)
//   bytes 8-11  manifest length, u32 little-endian
//   manifest    UTF-8 JSON: networks, layers in order, hyperparameters, and for every weight
//               tensor its shape and byte offset into the blob
//   blob        little-endian float32 values

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wmh/network.hpp"

namespace wmh {

inline constexpr std::uint32_t kSgwtVersion = 1;

/// Loads a container holding exactly one network.
/// Errors: BadMagic, BadVersion, BadManifest, TruncatedTensor, ShapeCheckFailed.
NetworkSpec load_network(std::span<const std::uint8_t> bytes);
/// Loads every network in the container (e.g. a bundle tagged axial/sagittal/coronal/meta).
std::vector<NetworkSpec> load_networks(std::span<const std::uint8_t> bytes);

/// Canonical encoding: tensors packed in layer order, compact JSON with sorted keys.
std::vector<std::uint8_t> save_network(const NetworkSpec& net);
std::vector<std::uint8_t> save_networks(std::span<const NetworkSpec> nets);

std::vector<NetworkSpec> load_networks_file(const std::filesystem::path& path);

}  // namespace wmh
