#include "clonar/generation/extrude.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "clonar/error.hpp"

namespace clonar::generation {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

std::vector<Point2> dropCollinear(std::vector<Point2> poly) {
  bool changed = true;
  while (changed && poly.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < poly.size() && poly.size() > 3; ++i) {
      const std::size_t n = poly.size();
      const auto& prev = poly[(i + n - 1) % n];
      const auto& next = poly[(i + 1) % n];
      if (std::fabs(cross(prev, poly[i], next)) < 1e-12) {
        poly.erase(poly.begin() + static_cast<long>(i));
        changed = true;
        --i;
      }
    }
  }
  return poly;
}

double pointSegmentDistance(const Point2& p, const Point2& a, const Point2& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return std::hypot(p.x - a.x, p.y - a.y);
  const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

void douglasPeucker(std::span<const Point2> pts, std::size_t first, std::size_t last,
                    double tol, std::vector<bool>& keep) {
  if (last <= first + 1) return;
  double worst = -1.0;
  std::size_t at = first;
  for (std::size_t i = first + 1; i < last; ++i) {
    const double d = pointSegmentDistance(pts[i], pts[first], pts[last % pts.size()]);
    if (d > worst) {
      worst = d;
      at = i;
    }
  }
  if (worst > tol) {
    keep[at] = true;
    douglasPeucker(pts, first, at, tol, keep);
    douglasPeucker(pts, at, last, tol, keep);
  }
}

bool properlyIntersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b);
  const double d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on = [](const Point2& p, const Point2& q, const Point2& r) {
    return std::fabs(cross(p, q, r)) < 1e-12 && r.x >= std::min(p.x, q.x) &&
           r.x <= std::max(p.x, q.x) && r.y >= std::min(p.y, q.y) && r.y <= std::max(p.y, q.y);
  };
  return on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d);
}

bool insideTriangle(const Point2& p, const Point2& a, const Point2& b, const Point2& c) {
  return cross(a, b, p) >= 0 && cross(b, c, p) >= 0 && cross(c, a, p) >= 0;
}

}  // namespace

std::vector<Point2> silhouetteOutline(const BinaryMask& mask) {
  const auto comps = imaging::labelComponents(mask);
  if (comps.info.empty()) fail(ErrorCode::EmptyMask, "silhouette mask is empty");

  int best = 0;
  for (int id = 1; id < static_cast<int>(comps.info.size()); ++id) {
    if (comps.info[static_cast<std::size_t>(id)].pixelCount >
        comps.info[static_cast<std::size_t>(best)].pixelCount) {
      best = id;
    }
  }
  const auto& box = comps.info[static_cast<std::size_t>(best)].bbox;
  auto fg = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < comps.width && y < comps.height && comps.label(x, y) == best;
  };

  // Directed pixel-edge boundary on the corner lattice; interior on the right
  // when walking in screen coordinates.
  struct Edge {
    int x0, y0, dx, dy;
    bool used = false;
  };
  std::vector<Edge> edges;
  for (int y = box.y; y < box.bottom(); ++y) {
    for (int x = box.x; x < box.right(); ++x) {
      if (!fg(x, y)) continue;
      if (!fg(x, y - 1)) edges.push_back({x, y, 1, 0});
      if (!fg(x + 1, y)) edges.push_back({x + 1, y, 0, 1});
      if (!fg(x, y + 1)) edges.push_back({x + 1, y + 1, -1, 0});
      if (!fg(x - 1, y)) edges.push_back({x, y + 1, 0, -1});
    }
  }
  auto key = [](int x, int y) {
    return (static_cast<long long>(y) << 32) ^ static_cast<long long>(static_cast<unsigned>(x));
  };
  std::unordered_map<long long, std::vector<std::size_t>> outgoing;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    outgoing[key(edges[i].x0, edges[i].y0)].push_back(i);
  }

  std::vector<Point2> bestLoop;
  double bestArea = 0.0;
  for (std::size_t s = 0; s < edges.size(); ++s) {
    if (edges[s].used) continue;
    std::vector<Point2> loop;
    std::size_t cur = s;
    const int sx = edges[s].x0, sy = edges[s].y0;
    for (;;) {
      Edge& e = edges[cur];
      e.used = true;
      loop.push_back({static_cast<double>(e.x0), static_cast<double>(e.y0)});
      const int vx = e.x0 + e.dx, vy = e.y0 + e.dy;
      if (vx == sx && vy == sy) break;
      // Right turn first keeps diagonal pinches as separate loops.
      const std::array<std::pair<int, int>, 3> prefs = {
          {{-e.dy, e.dx}, {e.dx, e.dy}, {e.dy, -e.dx}}};
      std::size_t next = edges.size();
      const auto& cands = outgoing[key(vx, vy)];
      for (const auto& [dx, dy] : prefs) {
        for (const auto c : cands) {
          if (!edges[c].used && edges[c].dx == dx && edges[c].dy == dy) {
            next = c;
            break;
          }
        }
        if (next != edges.size()) break;
      }
      if (next == edges.size()) break;  // cannot happen on a closed boundary
      cur = next;
    }
    const double a = imaging::signedArea(loop);
    if (a > bestArea) {
      bestArea = a;
      bestLoop = std::move(loop);
    }
  }
  if (bestLoop.size() < 3) fail(ErrorCode::DegenerateSilhouette, "no outer boundary found");
  return dropCollinear(std::move(bestLoop));
}

std::vector<Point2> simplifyClosed(std::span<const Point2> polygon, double tolerance) {
  const std::size_t n = polygon.size();
  if (n <= 3) return {polygon.begin(), polygon.end()};

  std::size_t far = 0;
  double farDist = -1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = std::hypot(polygon[i].x - polygon[0].x, polygon[i].y - polygon[0].y);
    if (d > farDist) {
      farDist = d;
      far = i;
    }
  }
  std::vector<bool> keep(n, false);
  keep[0] = keep[far] = true;
  douglasPeucker(polygon, 0, far, tolerance, keep);
  douglasPeucker(polygon, far, n, tolerance, keep);  // index n wraps to 0

  std::vector<Point2> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(polygon[i]);
  }
  return out;
}

bool isSimplePolygon(std::span<const Point2> p) {
  const std::size_t n = p.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (properlyIntersect(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::vector<std::array<std::uint32_t, 3>> triangulate(std::span<const Point2> poly) {
  std::vector<std::uint32_t> idx(poly.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);

  std::vector<std::array<std::uint32_t, 3>> tris;
  while (idx.size() > 3) {
    const std::size_t n = idx.size();
    bool clipped = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ia = idx[(i + n - 1) % n], ib = idx[i], ic = idx[(i + 1) % n];
      const Point2 &a = poly[ia], &b = poly[ib], &c = poly[ic];
      if (cross(a, b, c) <= 1e-12) continue;  // reflex or flat
      bool blocked = false;
      for (const auto k : idx) {
        if (k == ia || k == ib || k == ic) continue;
        if (insideTriangle(poly[k], a, b, c)) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      tris.push_back({ia, ib, ic});
      idx.erase(idx.begin() + static_cast<long>(i));
      clipped = true;
      break;
    }
    if (!clipped) fail(ErrorCode::DegenerateSilhouette, "polygon could not be triangulated");
  }
  if (cross(poly[idx[0]], poly[idx[1]], poly[idx[2]]) <= 1e-12) {
    fail(ErrorCode::DegenerateSilhouette, "final triangle is degenerate");
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

Mesh stubExtrude(const BinaryMask& mask, const ExtrudeOptions& opts) {
  if (!mask.any()) fail(ErrorCode::EmptyMask, "silhouette mask is empty");
  const std::vector<Point2> outline = silhouetteOutline(mask);

  std::vector<Point2> poly = simplifyClosed(outline, opts.simplifyTolerancePx);
  if (poly.size() < 3 || !isSimplePolygon(poly) || imaging::signedArea(poly) <= 1e-9) {
    poly = outline;
  }
  if (poly.size() < 3 || imaging::signedArea(poly) <= 1e-9) {
    fail(ErrorCode::DegenerateSilhouette, "silhouette has no area");
  }

  double minX = poly[0].x, maxX = minX, minY = poly[0].y, maxY = minY;
  for (const auto& p : poly) {
    minX = std::min(minX, p.x);
    maxX = std::max(maxX, p.x);
    minY = std::min(minY, p.y);
    maxY = std::max(maxY, p.y);
  }
  const double cx = 0.5 * (minX + maxX), cy = 0.5 * (minY + maxY);
  const double s = opts.metresPerPixel;

  // Flip to y-up metres. The image-space outline is positive with y down, so
  // reversing restores counter-clockwise order in the flipped frame.
  std::vector<Point2> ccw;
  ccw.reserve(poly.size());
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) {
    ccw.push_back({(it->x - cx) * s, -(it->y - cy) * s});
  }
  const double areaM2 = imaging::signedArea(ccw);
  const double depth = opts.depth.kind == DepthPolicy::Kind::Fixed
                           ? opts.depth.value
                           : opts.depth.value * std::sqrt(areaM2);
  if (!(depth > 0.0)) fail(ErrorCode::DegenerateSilhouette, "extrusion depth must be positive");

  const auto caps = triangulate(ccw);
  const auto n = static_cast<std::uint32_t>(ccw.size());

  Mesh m;
  m.vertices.reserve(2 * n);
  for (const auto& p : ccw) m.vertices.push_back({p.x, p.y, 0.5 * depth});
  for (const auto& p : ccw) m.vertices.push_back({p.x, p.y, -0.5 * depth});
  for (const auto& t : caps) {
    m.faces.push_back({t[0], t[1], t[2]});
    m.faces.push_back({n + t[0], n + t[2], n + t[1]});
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    m.faces.push_back({n + i, n + j, j});
    m.faces.push_back({n + i, j, i});
  }
  return m;
}

}  // namespace clonar::generation
