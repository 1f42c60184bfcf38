#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace clonar::imaging {

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 255;
  friend bool operator==(const Rgba&, const Rgba&) = default;
};

/// Hexcone HSV. h in degrees [0,360), s and v in [0,1]; h is 0 when s is 0.
struct HsvPixel {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

/// Integer pixel coordinate. Pixel (x, y) is centred on the lattice point (x, y)
/// and covers [x-0.5, x+0.5] x [y-0.5, y+0.5].
struct PixelPoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Continuous image-space point, same frame as PixelPoint.
struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct PixelRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const { return x + w; }    // exclusive
  int bottom() const { return y + h; }   // exclusive
  bool contains(int px, int py) const {
    return px >= x && px < right() && py >= y && py < bottom();
  }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Row-major RGBA8 raster.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgba fill = {0, 0, 0, 255});
  RasterImage(int width, int height, std::vector<Rgba> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  Rgba& at(int x, int y) { return pixels_[index(x, y)]; }
  const Rgba& at(int x, int y) const { return pixels_[index(x, y)]; }

  std::span<const Rgba> pixels() const { return pixels_; }
  std::span<Rgba> pixels() { return pixels_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgba> pixels_;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }

  bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool value = true) { bits_[index(x, y)] = value ? 1 : 0; }

  /// Out-of-range coordinates read as background.
  bool test(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && get(x, y);
  }

  std::size_t count() const;
  bool any() const;

  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Closed hue interval in degrees. lo > hi wraps through 360.
struct HueRange {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double hue) const {
    return lo <= hi ? (hue >= lo && hue <= hi) : (hue >= lo || hue <= hi);
  }
};

struct ColorThresholds {
  std::vector<HueRange> hues;
  double sMin = 0.0;
  double vMin = 0.0;

  bool matches(const HsvPixel& p) const;

  /// Default stroke-red window: hue in [0,10] or [350,360), s >= 0.5, v >= 0.3.
  static ColorThresholds strokeRed();
};

/// Outer border of one 8-connected foreground component.
struct Contour {
  std::vector<PixelPoint> points;
  long area = 0;  // pixels enclosed by the border, holes included
};

/// Result of 8-connected component labelling.
struct Components {
  struct Info {
    long pixelCount = 0;
    PixelRect bbox;
    PixelPoint first;  // first pixel in raster order
  };

  int width = 0;
  int height = 0;
  std::vector<int> labels;  // -1 for background
  std::vector<Info> info;   // ordered by first pixel in raster order

  int label(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
  BinaryMask componentMask(int id) const;
};

HsvPixel rgbToHsv(Rgba p);
Rgba hsvToRgb(const HsvPixel& p, std::uint8_t alpha = 255);

BinaryMask colorMask(const RasterImage& img, std::span<const HueRange> hueRanges,
                     double sMin, double vMin);
BinaryMask colorMask(const RasterImage& img, const ColorThresholds& thresholds);

Components labelComponents(const BinaryMask& mask);

/// Suzuki-style outer border following over 8-connected components, returned
/// in raster order of each component's first pixel. Components whose area is
/// below minArea, or whose border walk has fewer than three points, are dropped.
std::vector<Contour> extractContours(const BinaryMask& mask, long minArea = 0);

/// Largest-area contour; ties go to the earliest raster-order start point.
Contour largestContour(std::span<const Contour> contours);

/// Even-odd fill sampled at pixel centres, boundary-inclusive.
BinaryMask rasterizePolygon(std::span<const Point2> polygon, int width, int height);
BinaryMask rasterizePolygon(std::span<const PixelPoint> polygon, int width, int height);

PixelRect boundingBox(const BinaryMask& mask);

/// Expand by padding on every side, then clip to a width x height canvas.
/// Returns an empty rect (w == 0) when there is no overlap.
PixelRect padAndClamp(const PixelRect& r, int padding, int width, int height);

RasterImage crop(const RasterImage& img, const PixelRect& rect, int paddingPx);

double signedArea(std::span<const Point2> polygon);

}  // namespace clonar::imaging
