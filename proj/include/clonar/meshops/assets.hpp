#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clonar/generation/mesh.hpp"

namespace clonar::meshops {

/// Binary glTF 2.0: one scene, one node, one mesh with one triangle primitive,
/// float32 POSITION (and NORMAL when present), uint32 indices, single buffer.
/// Throws MeshTooLarge.
std::vector<std::uint8_t> exportGltf(const Mesh& m);

/// Reads the first primitive of the first mesh of a .glb. Throws MalformedAsset.
Mesh importGltf(std::span<const std::uint8_t> bytes);

/// "v x y z" and 1-based "f a b c" lines, shortest round-trip decimals.
std::string exportObj(const Mesh& m);

/// Accepts v/f lines (f tokens may be a, a/b, a//c, a/b/c, negative-relative);
/// polygons are fan-triangulated, other statements ignored.
/// Throws MalformedAsset.
Mesh importObj(std::string_view text);

}  // namespace clonar::meshops
