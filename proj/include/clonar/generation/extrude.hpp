#pragma once

#include <span>
#include <vector>

#include "clonar/generation/mesh.hpp"
#include "clonar/imaging/raster.hpp"

namespace clonar::generation {

using imaging::BinaryMask;
using imaging::Point2;

struct DepthPolicy {
  enum class Kind { Fixed, SqrtArea };
  Kind kind = Kind::SqrtArea;
  double value = 0.4;  // metres for Fixed, scale factor for SqrtArea

  static DepthPolicy fixed(double metres) { return {Kind::Fixed, metres}; }
  static DepthPolicy sqrtArea(double factor = 0.4) { return {Kind::SqrtArea, factor}; }
};

struct ExtrudeOptions {
  DepthPolicy depth = DepthPolicy::sqrtArea();
  double metresPerPixel = 0.001;
  double simplifyTolerancePx = 1.5;
};

/// Pixel-edge outline of the mask's largest 8-connected component, as a
/// simple polygon on the pixel-corner lattice with collinear vertices removed.
/// Positive shoelace area in image coordinates (y down). Throws EmptyMask.
std::vector<Point2> silhouetteOutline(const BinaryMask& mask);

/// Douglas-Peucker over a closed polygon.
std::vector<Point2> simplifyClosed(std::span<const Point2> polygon, double tolerance);

/// Ear clipping of a simple counter-clockwise polygon; returns index triples.
/// Throws DegenerateSilhouette when no ear can be found.
std::vector<std::array<std::uint32_t, 3>> triangulate(std::span<const Point2> ccwPolygon);

bool isSimplePolygon(std::span<const Point2> polygon);

/// Deterministic stand-in generator: extrudes the silhouette into a closed
/// prism centred on the origin, y up, caps at z = +-depth/2.
/// Throws EmptyMask or DegenerateSilhouette.
Mesh stubExtrude(const BinaryMask& mask, const ExtrudeOptions& opts = {});

}  // namespace clonar::generation
