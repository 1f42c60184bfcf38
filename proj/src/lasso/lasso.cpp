#include "clonar/lasso/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "clonar/error.hpp"

namespace clonar::lasso {

using imaging::signedArea;

void Stroke::append(std::span<const Point2> pts, std::int64_t nowMs) {
  for (const auto& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      fail(ErrorCode::InvalidArgument, "stroke point has a non-finite coordinate");
    }
  }
  if (points.empty()) startedAtMs = nowMs;
  points.insert(points.end(), pts.begin(), pts.end());
  lastUpdatedAtMs = std::max(lastUpdatedAtMs, nowMs);
}

namespace {

double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<Point2> mergeClosePoints(std::span<const Point2> pts, double tol) {
  std::vector<Point2> out;
  for (const auto& p : pts) {
    if (out.empty() || dist(out.back(), p) >= tol) out.push_back(p);
  }
  while (out.size() > 1 && dist(out.front(), out.back()) < tol) out.pop_back();
  return out;
}

// Proper or touching intersection of segments ab and cd, excluding collinear
// overlaps (those have no single crossing point).
std::optional<Point2> segmentIntersection(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double rx = b.x - a.x, ry = b.y - a.y;
  const double sx = d.x - c.x, sy = d.y - c.y;
  const double denom = rx * sy - ry * sx;
  if (std::fabs(denom) < 1e-12) return std::nullopt;
  const double t = ((c.x - a.x) * sy - (c.y - a.y) * sx) / denom;
  const double u = ((c.x - a.x) * ry - (c.y - a.y) * rx) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return Point2{a.x + t * rx, a.y + t * ry};
}

bool onSegment(Point2 a, Point2 b, Point2 p) {
  const double len = dist(a, b);
  const double tol = 1e-9 * std::max(1.0, len);
  if (std::fabs(cross(a, b, p)) > tol * std::max(1.0, len)) return false;
  return p.x >= std::min(a.x, b.x) - tol && p.x <= std::max(a.x, b.x) + tol &&
         p.y >= std::min(a.y, b.y) - tol && p.y <= std::max(a.y, b.y) + tol;
}

}  // namespace

std::vector<std::vector<Point2>> simpleLoops(std::vector<Point2> closed) {
  std::vector<std::vector<Point2>> done;
  std::vector<std::vector<Point2>> work;
  work.push_back(mergeClosePoints(closed, 1e-9));

  while (!work.empty()) {
    std::vector<Point2> loop = std::move(work.back());
    work.pop_back();
    loop = mergeClosePoints(loop, 1e-9);
    const std::size_t n = loop.size();
    if (n < 3) continue;

    bool split = false;
    for (std::size_t i = 0; i < n && !split; ++i) {
      for (std::size_t j = i + 2; j < n && !split; ++j) {
        if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
        const auto hit =
            segmentIntersection(loop[i], loop[(i + 1) % n], loop[j], loop[(j + 1) % n]);
        if (!hit) continue;
        // Loop A: hit, v[i+1..j]. Loop B: v[0..i], hit, v[j+1..n-1].
        std::vector<Point2> a{*hit};
        a.insert(a.end(), loop.begin() + static_cast<long>(i + 1),
                 loop.begin() + static_cast<long>(j + 1));
        std::vector<Point2> b(loop.begin(), loop.begin() + static_cast<long>(i + 1));
        b.push_back(*hit);
        b.insert(b.end(), loop.begin() + static_cast<long>(j + 1), loop.end());
        work.push_back(std::move(a));
        work.push_back(std::move(b));
        split = true;
      }
    }
    if (!split) done.push_back(std::move(loop));
  }
  return done;
}

LassoPolygon closeStroke(const Stroke& stroke, const LassoConfig& cfg) {
  std::vector<Point2> pts = mergeClosePoints(stroke.points, cfg.mergeDistancePx);
  if (pts.size() < 3) {
    fail(ErrorCode::StrokeTooShort, "stroke has fewer than 3 distinct points");
  }

  const auto loops = simpleLoops(std::move(pts));
  const std::vector<Point2>* best = nullptr;
  double bestArea = -1.0;
  for (const auto& loop : loops) {
    const double a = std::fabs(signedArea(loop));
    if (a > bestArea) {
      bestArea = a;
      best = &loop;
    }
  }
  if (best == nullptr || bestArea <= 0.0) {
    fail(ErrorCode::ZoneTooSmall, "stroke encloses no area");
  }
  if (bestArea < cfg.minZoneAreaPx) {
    fail(ErrorCode::ZoneTooSmall, "zone area " + std::to_string(bestArea) +
                                      " px^2 below minimum " + std::to_string(cfg.minZoneAreaPx));
  }
  return {*best, bestArea};
}

LassoPolygon zoneFromStrokeColor(const imaging::RasterImage& frame,
                                 const imaging::ColorThresholds& stroke, long minContourArea,
                                 const LassoConfig& cfg) {
  const auto contours = imaging::extractContours(imaging::colorMask(frame, stroke), minContourArea);
  if (contours.empty()) fail(ErrorCode::StrokeTooShort, "no stroke found in the frame");
  const auto outer = imaging::largestContour(contours);
  Stroke s;
  for (const auto& p : outer.points) {
    s.points.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
  }
  return closeStroke(s, cfg);
}

bool pointInPolygon(std::span<const Point2> v, Point2 p) {
  const std::size_t n = v.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (onSegment(v[j], v[i], p)) return true;
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double x = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool pointInPolygon(const LassoPolygon& poly, Point2 p) {
  return pointInPolygon(std::span<const Point2>(poly.vertices), p);
}

double maskInsideFraction(const LassoPolygon& poly, const BinaryMask& mask) {
  std::size_t total = 0, inside = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.get(x, y)) continue;
      ++total;
      if (pointInPolygon(poly, {static_cast<double>(x), static_cast<double>(y)})) ++inside;
    }
  }
  if (total == 0) fail(ErrorCode::EmptyMask, "mask has no set bits");
  return static_cast<double>(inside) / static_cast<double>(total);
}

}  // namespace clonar::lasso
