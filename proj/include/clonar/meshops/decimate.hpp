#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "clonar/generation/mesh.hpp"

namespace clonar::meshops {

struct DecimationParams {
  std::size_t targetVertices = 2048;
  std::optional<double> maxError;  // m^2
  bool preserveBoundary = false;
};

struct DecimationStats {
  std::size_t collapses = 0;
  std::size_t rejected = 0;
  double maxCollapseCost = 0.0;
  std::vector<double> collapseCosts;  // in execution order
};

/// Quadric-error edge-collapse decimation to at most targetVertices, or as
/// close as legal collapses allow. Unreferenced vertices are dropped from
/// the output. Throws TargetTooSmall (< 4) or NotManifold.
Mesh decimate(const Mesh& m, const DecimationParams& p, DecimationStats* stats = nullptr);

}  // namespace clonar::meshops
