#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clonar/imaging/raster.hpp"

namespace clonar::lasso {

using imaging::BinaryMask;
using imaging::Point2;

/// Ordered user stroke in image space. Timestamps are monotonic milliseconds.
struct Stroke {
  std::vector<Point2> points;
  std::int64_t startedAtMs = 0;
  std::int64_t lastUpdatedAtMs = 0;

  /// Appends points, rejecting NaN/inf coordinates with InvalidArgument.
  void append(std::span<const Point2> pts, std::int64_t nowMs);
};

/// Closed selection region. Vertices are stored open (last != first) and
/// treated as closed.
struct LassoPolygon {
  std::vector<Point2> vertices;
  double areaPx = 0.0;
};

struct LassoConfig {
  double minZoneAreaPx = 400.0;
  double mergeDistancePx = 0.5;
};

/// Drops consecutive duplicates and near-coincident points, closes the loop,
/// resolves self-crossings by keeping the largest simple loop.
/// Throws StrokeTooShort or ZoneTooSmall.
LassoPolygon closeStroke(const Stroke& stroke, const LassoConfig& cfg = {});

/// Even-odd rule; points on an edge count as inside.
bool pointInPolygon(const LassoPolygon& poly, Point2 p);
bool pointInPolygon(std::span<const Point2> vertices, Point2 p);

/// Share of the mask's set bits whose pixel centre lies inside the polygon.
/// Throws EmptyMask.
double maskInsideFraction(const LassoPolygon& poly, const BinaryMask& mask);

/// Zone from a stroke painted into the frame: colour mask, outer contours of
/// at least minContourArea px, largest one as the polygon (pixel centres).
/// Throws StrokeTooShort when no stroke is visible, ZoneTooSmall as closeStroke.
LassoPolygon zoneFromStrokeColor(const imaging::RasterImage& frame,
                                 const imaging::ColorThresholds& stroke,
                                 long minContourArea = 25, const LassoConfig& cfg = {});

/// Splits a closed polyline at its crossings and returns every simple loop.
std::vector<std::vector<Point2>> simpleLoops(std::vector<Point2> closed);

}  // namespace clonar::lasso
