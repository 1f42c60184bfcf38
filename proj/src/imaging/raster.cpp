#include "clonar/imaging/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <string>

#include "clonar/error.hpp"

namespace clonar::imaging {

RasterImage::RasterImage(int width, int height, Rgba fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    fail(ErrorCode::InvalidArgument, "raster dimensions must be positive");
  }
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

RasterImage::RasterImage(int width, int height, std::vector<Rgba> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) {
    fail(ErrorCode::InvalidArgument, "raster dimensions must be positive");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    fail(ErrorCode::InvalidArgument, "pixel count does not match width x height");
  }
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    fail(ErrorCode::InvalidArgument, "mask dimensions must be positive");
  }
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool BinaryMask::any() const {
  return std::find(bits_.begin(), bits_.end(), std::uint8_t{1}) != bits_.end();
}

bool ColorThresholds::matches(const HsvPixel& p) const {
  if (p.s < sMin || p.v < vMin) return false;
  return std::any_of(hues.begin(), hues.end(),
                     [&](const HueRange& r) { return r.contains(p.h); });
}

ColorThresholds ColorThresholds::strokeRed() {
  return ColorThresholds{{{0.0, 10.0}, {350.0, 360.0}}, 0.5, 0.3};
}

HsvPixel rgbToHsv(Rgba p) {
  const int r = p.r, g = p.g, b = p.b;
  const int maxc = std::max({r, g, b});
  const int minc = std::min({r, g, b});
  const int delta = maxc - minc;

  HsvPixel out;
  out.v = maxc / 255.0;
  if (maxc == 0 || delta == 0) {
    return out;  // achromatic
  }
  out.s = static_cast<double>(delta) / maxc;

  double h;
  if (maxc == r) {
    h = 60.0 * static_cast<double>(g - b) / delta;
  } else if (maxc == g) {
    h = 60.0 * (2.0 + static_cast<double>(b - r) / delta);
  } else {
    h = 60.0 * (4.0 + static_cast<double>(r - g) / delta);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

Rgba hsvToRgb(const HsvPixel& p, std::uint8_t alpha) {
  const double c = p.v * p.s;
  const double hp = std::fmod(p.h, 360.0) / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = p.v - c;
  auto to8 = [m](double ch) {
    return static_cast<std::uint8_t>(std::clamp(std::lround((ch + m) * 255.0), 0L, 255L));
  };
  return {to8(r), to8(g), to8(b), alpha};
}

BinaryMask colorMask(const RasterImage& img, std::span<const HueRange> hueRanges,
                     double sMin, double vMin) {
  ColorThresholds t{{hueRanges.begin(), hueRanges.end()}, sMin, vMin};
  return colorMask(img, t);
}

BinaryMask colorMask(const RasterImage& img, const ColorThresholds& thresholds) {
  BinaryMask mask(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (thresholds.matches(rgbToHsv(img.at(x, y)))) mask.set(x, y);
    }
  }
  return mask;
}

BinaryMask Components::componentMask(int id) const {
  BinaryMask m(width, height);
  const auto& b = info.at(static_cast<std::size_t>(id)).bbox;
  for (int y = b.y; y < b.bottom(); ++y) {
    for (int x = b.x; x < b.right(); ++x) {
      if (label(x, y) == id) m.set(x, y);
    }
  }
  return m;
}

Components labelComponents(const BinaryMask& mask) {
  Components c;
  c.width = mask.width();
  c.height = mask.height();
  c.labels.assign(static_cast<std::size_t>(c.width) * static_cast<std::size_t>(c.height), -1);

  auto idx = [&](int x, int y) {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(c.width) +
           static_cast<std::size_t>(x);
  };

  std::deque<PixelPoint> queue;
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      if (!mask.get(x, y) || c.labels[idx(x, y)] != -1) continue;

      const int id = static_cast<int>(c.info.size());
      Components::Info info;
      info.first = {x, y};
      int minX = x, maxX = x, minY = y, maxY = y;

      c.labels[idx(x, y)] = id;
      queue.push_back({x, y});
      while (!queue.empty()) {
        const PixelPoint p = queue.front();
        queue.pop_front();
        ++info.pixelCount;
        minX = std::min(minX, p.x);
        maxX = std::max(maxX, p.x);
        minY = std::min(minY, p.y);
        maxY = std::max(maxY, p.y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx, ny = p.y + dy;
            if (mask.test(nx, ny) && c.labels[idx(nx, ny)] == -1) {
              c.labels[idx(nx, ny)] = id;
              queue.push_back({nx, ny});
            }
          }
        }
      }
      info.bbox = {minX, minY, maxX - minX + 1, maxY - minY + 1};
      c.info.push_back(info);
    }
  }
  return c;
}

namespace {

// Clockwise in screen coordinates (y down), starting east.
constexpr std::array<PixelPoint, 8> kDirs = {{
    {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1},
}};

int directionOf(PixelPoint from, PixelPoint to) {
  const PixelPoint d{to.x - from.x, to.y - from.y};
  for (int i = 0; i < 8; ++i) {
    if (kDirs[static_cast<std::size_t>(i)] == d) return i;
  }
  return -1;
}

PixelPoint step(PixelPoint p, int dir) {
  const auto& d = kDirs[static_cast<std::size_t>(((dir % 8) + 8) % 8)];
  return {p.x + d.x, p.y + d.y};
}

template <typename IsForeground>
std::vector<PixelPoint> followOuterBorder(PixelPoint start, IsForeground fg) {
  std::vector<PixelPoint> points{start};

  // Clockwise search from the west neighbour, which is background for a
  // raster-order start pixel.
  PixelPoint first{};
  bool found = false;
  for (int k = 1; k <= 8 && !found; ++k) {
    const PixelPoint q = step(start, 4 + k);
    if (fg(q.x, q.y)) {
      first = q;
      found = true;
    }
  }
  if (!found) return points;

  PixelPoint prev = first;
  PixelPoint cur = start;
  for (;;) {
    const int back = directionOf(cur, prev);
    PixelPoint next = prev;
    for (int k = 1; k <= 8; ++k) {
      const PixelPoint q = step(cur, back - k);
      if (fg(q.x, q.y)) {
        next = q;
        break;
      }
    }
    if (next == start && cur == first) break;
    prev = cur;
    cur = next;
    points.push_back(cur);
  }
  return points;
}

long enclosedArea(const Components& comps, int id) {
  const auto& b = comps.info[static_cast<std::size_t>(id)].bbox;
  const int gw = b.w + 2, gh = b.h + 2;
  std::vector<std::uint8_t> state(static_cast<std::size_t>(gw) * static_cast<std::size_t>(gh), 0);
  auto gidx = [gw](int gx, int gy) {
    return static_cast<std::size_t>(gy) * static_cast<std::size_t>(gw) +
           static_cast<std::size_t>(gx);
  };
  for (int gy = 1; gy <= b.h; ++gy) {
    for (int gx = 1; gx <= b.w; ++gx) {
      if (comps.label(b.x + gx - 1, b.y + gy - 1) == id) state[gidx(gx, gy)] = 1;  // wall
    }
  }
  // 4-connected background flood from the ring; unreached cells are enclosed.
  long reached = 0;
  std::deque<PixelPoint> queue{{0, 0}};
  state[gidx(0, 0)] = 2;
  while (!queue.empty()) {
    const PixelPoint p = queue.front();
    queue.pop_front();
    ++reached;
    static constexpr std::array<PixelPoint, 4> k4 = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    for (const auto& d : k4) {
      const int nx = p.x + d.x, ny = p.y + d.y;
      if (nx < 0 || ny < 0 || nx >= gw || ny >= gh) continue;
      auto& s = state[gidx(nx, ny)];
      if (s == 0) {
        s = 2;
        queue.push_back({nx, ny});
      }
    }
  }
  return static_cast<long>(gw) * gh - reached;
}

}  // namespace

std::vector<Contour> extractContours(const BinaryMask& mask, long minArea) {
  const Components comps = labelComponents(mask);
  std::vector<Contour> out;
  for (int id = 0; id < static_cast<int>(comps.info.size()); ++id) {
    const long area = enclosedArea(comps, id);
    if (area < minArea) continue;
    auto fg = [&](int x, int y) {
      return x >= 0 && y >= 0 && x < comps.width && y < comps.height && comps.label(x, y) == id;
    };
    Contour c;
    c.points = followOuterBorder(comps.info[static_cast<std::size_t>(id)].first, fg);
    c.area = area;
    if (c.points.size() < 3) continue;
    out.push_back(std::move(c));
  }
  return out;
}

Contour largestContour(std::span<const Contour> contours) {
  if (contours.empty()) fail(ErrorCode::EmptyContourSet, "no contours to choose from");
  auto earlier = [](const PixelPoint& a, const PixelPoint& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  };
  const Contour* best = &contours.front();
  for (const auto& c : contours.subspan(1)) {
    if (c.area > best->area ||
        (c.area == best->area && earlier(c.points.front(), best->points.front()))) {
      best = &c;
    }
  }
  return *best;
}

double signedArea(std::span<const Point2> polygon) {
  double twice = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

BinaryMask rasterizePolygon(std::span<const Point2> poly, int width, int height) {
  if (poly.size() < 3 || std::fabs(signedArea(poly)) < 1e-12) {
    fail(ErrorCode::DegeneratePolygon, "polygon has zero area");
  }
  constexpr double kEps = 1e-9;
  BinaryMask mask(width, height);
  const std::size_t n = poly.size();
  std::vector<double> xs;

  auto fillSpan = [&](int y, double x0, double x1) {
    const int a = std::max(0, static_cast<int>(std::ceil(x0 - kEps)));
    const int b = std::min(width - 1, static_cast<int>(std::floor(x1 + kEps)));
    for (int x = a; x <= b; ++x) mask.set(x, y);
  };

  for (int y = 0; y < height; ++y) {
    const double yc = y;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = poly[i];
      const Point2& b = poly[(i + 1) % n];
      if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y)) {
        xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) fillSpan(y, xs[k], xs[k + 1]);

    // Boundary lattice points the half-open crossing rule misses.
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = poly[i];
      const Point2& b = poly[(i + 1) % n];
      if (yc < std::min(a.y, b.y) - kEps || yc > std::max(a.y, b.y) + kEps) continue;
      if (std::fabs(a.y - b.y) < kEps) {
        if (std::fabs(a.y - yc) < kEps) fillSpan(y, std::min(a.x, b.x), std::max(a.x, b.x));
        continue;
      }
      const double x = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
      const double rx = std::round(x);
      if (std::fabs(x - rx) < kEps && rx >= 0 && rx < width) {
        mask.set(static_cast<int>(rx), y);
      }
    }
  }
  return mask;
}

BinaryMask rasterizePolygon(std::span<const PixelPoint> polygon, int width, int height) {
  std::vector<Point2> pts;
  pts.reserve(polygon.size());
  for (const auto& p : polygon) pts.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
  return rasterizePolygon(std::span<const Point2>(pts), width, height);
}

PixelRect boundingBox(const BinaryMask& mask) {
  int minX = mask.width(), minY = mask.height(), maxX = -1, maxY = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.get(x, y)) continue;
      minX = std::min(minX, x);
      maxX = std::max(maxX, x);
      minY = std::min(minY, y);
      maxY = std::max(maxY, y);
    }
  }
  if (maxX < 0) fail(ErrorCode::EmptyMask, "mask has no set bits");
  return {minX, minY, maxX - minX + 1, maxY - minY + 1};
}

PixelRect padAndClamp(const PixelRect& r, int padding, int width, int height) {
  const long x0 = std::max(0L, static_cast<long>(r.x) - padding);
  const long y0 = std::max(0L, static_cast<long>(r.y) - padding);
  const long x1 = std::min(static_cast<long>(width), static_cast<long>(r.right()) + padding);
  const long y1 = std::min(static_cast<long>(height), static_cast<long>(r.bottom()) + padding);
  if (x1 <= x0 || y1 <= y0) return {};
  return {static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0),
          static_cast<int>(y1 - y0)};
}

RasterImage crop(const RasterImage& img, const PixelRect& rect, int paddingPx) {
  if (rect.w <= 0 || rect.h <= 0 || paddingPx < 0) {
    fail(ErrorCode::InvalidArgument, "crop rect must have positive size");
  }
  if (padAndClamp(rect, 0, img.width(), img.height()).w == 0) {
    fail(ErrorCode::RectOutOfBounds,
         "crop rect (" + std::to_string(rect.x) + "," + std::to_string(rect.y) + "," +
             std::to_string(rect.w) + "," + std::to_string(rect.h) + ") misses the image");
  }
  const PixelRect r = padAndClamp(rect, paddingPx, img.width(), img.height());
  RasterImage out(r.w, r.h);
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) out.at(x, y) = img.at(r.x + x, r.y + y);
  }
  return out;
}

}  // namespace clonar::imaging
