#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "clonar/error.hpp"
#include "clonar/generation/mesh.hpp"
#include "clonar/imaging/raster.hpp"

namespace fixtures {

using clonar::Face;
using clonar::Mesh;
using clonar::Vec3;
using clonar::imaging::Point2;
using clonar::imaging::RasterImage;
using clonar::imaging::Rgba;

/// Name of the clonar::Error code thrown by f, or "none".
template <typename F>
std::string errorOf(F&& f) {
  try {
    f();
  } catch (const clonar::Error& e) {
    return std::string(clonar::toString(e.code()));
  }
  return "none";
}

inline void fillDisc(RasterImage& img, double cx, double cy, double r, Rgba c) {
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) img.at(x, y) = c;
    }
  }
}

inline void fillRect(RasterImage& img, int x0, int y0, int w, int h, Rgba c) {
  for (int y = y0; y < y0 + h; ++y) {
    for (int x = x0; x < x0 + w; ++x) {
      if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img.at(x, y) = c;
    }
  }
}

inline double segmentDistance(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::fmax(0.0, std::fmin(1.0, t));
  const double qx = a.x + t * dx - p.x, qy = a.y + t * dy - p.y;
  return std::sqrt(qx * qx + qy * qy);
}

/// Paints a closed polyline with the given half-width.
inline void strokeClosed(RasterImage& img, const std::vector<Point2>& pts, double halfWidth, Rgba c) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point2 a = pts[i], b = pts[(i + 1) % pts.size()];
    const int x0 = static_cast<int>(std::floor(std::fmin(a.x, b.x) - halfWidth - 1));
    const int x1 = static_cast<int>(std::ceil(std::fmax(a.x, b.x) + halfWidth + 1));
    const int y0 = static_cast<int>(std::floor(std::fmin(a.y, b.y) - halfWidth - 1));
    const int y1 = static_cast<int>(std::ceil(std::fmax(a.y, b.y) + halfWidth + 1));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) continue;
        if (segmentDistance({double(x), double(y)}, a, b) <= halfWidth) img.at(x, y) = c;
      }
    }
  }
}

inline std::vector<Point2> ellipse(double cx, double cy, double rx, double ry, int n) {
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) {
    const double t = 2 * std::numbers::pi * i / n;
    pts.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
  }
  return pts;
}

inline const Rgba kGreen{0, 200, 0, 255};
inline const Rgba kBlue{0, 0, 220, 255};
inline const Rgba kYellow{230, 230, 0, 255};
inline const Rgba kRed{230, 0, 0, 255};
inline const Rgba kWhite{255, 255, 255, 255};

/// 640x480 white frame with green, blue and yellow discs and a red lasso
/// painted around the green and blue ones.
struct LassoScene {
  RasterImage frame;
  std::vector<Point2> lasso;  // the painted stroke's centreline
};

inline LassoScene lassoScene(bool paintStroke = true) {
  LassoScene s{RasterImage(640, 480, kWhite), ellipse(240, 240, 165, 95, 96)};
  fillDisc(s.frame, 160, 240, 50, kGreen);
  fillDisc(s.frame, 320, 240, 50, kBlue);
  fillDisc(s.frame, 520, 240, 50, kYellow);
  if (paintStroke) strokeClosed(s.frame, s.lasso, 2.0, kRed);
  return s;
}

/// Icosahedron refined by edge midpoints projected to the unit sphere:
/// 12, 42, 162, 642 ... vertices, outward CCW winding.
inline Mesh icosphere(int subdivisions, double radius = 1.0) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Mesh m;
  const double base[12][3] = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                              {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                              {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  auto unit = [](Vec3 v) { return v * (1.0 / v.norm()); };
  for (const auto& b : base) m.vertices.push_back(unit({b[0], b[1], b[2]}));
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const auto id = static_cast<std::uint32_t>(m.vertices.size());
      m.vertices.push_back(unit((m.vertices[a] + m.vertices[b]) * 0.5));
      mid.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    for (const auto& f : m.faces) {
      const auto a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    m.faces = std::move(next);
  }
  for (auto& v : m.vertices) v = v * radius;
  return m;
}

/// n x n vertex grid on z = 0 spanning [0, size]^2.
inline Mesh planarGrid(int n, double size = 1.0) {
  Mesh m;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      m.vertices.push_back({size * i / (n - 1), size * j / (n - 1), 0.0});
    }
  }
  auto id = [n](int i, int j) { return static_cast<std::uint32_t>(j * n + i); };
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return m;
}

/// Axis-aligned box [0,sx]x[0,sy]x[0,sz], outward winding.
inline Mesh box(double sx = 1, double sy = 1, double sz = 1) {
  Mesh m;
  for (int k = 0; k < 8; ++k) {
    m.vertices.push_back({(k & 1) ? sx : 0.0, (k & 2) ? sy : 0.0, (k & 4) ? sz : 0.0});
  }
  m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

}  // namespace fixtures
