#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "clonar/error.hpp"
#include "clonar/imaging/codec.hpp"
#include "clonar/imaging/raster.hpp"

using namespace clonar;
using namespace clonar::imaging;

namespace {

// Even-odd crossing count with an explicit on-edge check, evaluated per pixel.
bool oracleInside(const std::vector<Point2>& poly, double px, double py) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly[i], b = poly[(i + 1) % n];
    const double cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    if (std::abs(cross) < 1e-12 && px >= std::min(a.x, b.x) - 1e-12 &&
        px <= std::max(a.x, b.x) + 1e-12 && py >= std::min(a.y, b.y) - 1e-12 &&
        py <= std::max(a.y, b.y) + 1e-12) {
      return true;
    }
  }
  bool in = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((poly[i].y > py) != (poly[j].y > py)) {
      const double xc = poly[j].x + (py - poly[j].y) * (poly[i].x - poly[j].x) / (poly[i].y - poly[j].y);
      if (px < xc) in = !in;
    }
  }
  return in;
}

// 8-connected components by breadth-first flood, returning pixel counts.
std::vector<long> floodSizes(const BinaryMask& m) {
  std::vector<int> seen(static_cast<std::size_t>(m.width() * m.height()), 0);
  std::vector<long> sizes;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.get(x, y) || seen[static_cast<std::size_t>(y * m.width() + x)]) continue;
      long count = 0;
      std::vector<PixelPoint> stack{{x, y}};
      seen[static_cast<std::size_t>(y * m.width() + x)] = 1;
      while (!stack.empty()) {
        const auto p = stack.back();
        stack.pop_back();
        ++count;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int qx = p.x + dx, qy = p.y + dy;
            if (!m.test(qx, qy)) continue;
            auto& s = seen[static_cast<std::size_t>(qy * m.width() + qx)];
            if (!s) {
              s = 1;
              stack.push_back({qx, qy});
            }
          }
        }
      }
      sizes.push_back(count);
    }
  }
  return sizes;
}

BinaryMask randomMask(std::mt19937& rng, int w, int h, double p) {
  std::bernoulli_distribution bit(p);
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, bit(rng));
  }
  return m;
}

RasterImage randomImage(std::mt19937& rng, int w, int h) {
  std::uniform_int_distribution<int> byte(0, 255);
  RasterImage img(w, h);
  for (auto& p : img.pixels()) {
    p = {static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
         static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng))};
  }
  return img;
}

}  // namespace

TEST_CASE("rgbToHsv primaries and grey") {
  auto red = rgbToHsv({255, 0, 0, 255});
  CHECK(red.h == 0.0);
  CHECK(red.s == 1.0);
  CHECK(red.v == 1.0);
  auto grey = rgbToHsv({128, 128, 128, 255});
  CHECK(grey.h == 0.0);
  CHECK(grey.s == 0.0);
  CHECK(grey.v == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
  auto green = rgbToHsv({0, 255, 0, 255});
  CHECK(green.h == 120.0);
  CHECK(green.s == 1.0);
  CHECK(green.v == 1.0);
  CHECK(rgbToHsv({0, 0, 255, 255}).h == 240.0);
  CHECK(rgbToHsv({255, 0, 255, 255}).h == 300.0);
}

TEST_CASE("hsv round trip within one level for saturated pixels") {
  for (int r = 0; r < 256; r += 5) {
    for (int g = 0; g < 256; g += 7) {
      for (int b = 0; b < 256; b += 3) {
        const Rgba p{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                     static_cast<std::uint8_t>(b), 255};
        const auto hsv = rgbToHsv(p);
        if (hsv.s <= 0) continue;
        const auto q = hsvToRgb(hsv);
        REQUIRE(std::abs(int(q.r) - r) <= 1);
        REQUIRE(std::abs(int(q.g) - g) <= 1);
        REQUIRE(std::abs(int(q.b) - b) <= 1);
      }
    }
  }
}

TEST_CASE("colorMask") {
  const auto red = ColorThresholds::strokeRed();
  CHECK(colorMask(RasterImage(8, 8, {255, 0, 0, 255}), red).count() == 64);
  CHECK(colorMask(RasterImage(8, 8, {0, 0, 255, 255}), red).count() == 0);

  RasterImage half(10, 10, {255, 255, 255, 255});
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 5; ++x) half.at(x, y) = {220, 10, 10, 255};
  }
  const auto m = colorMask(half, red);
  std::size_t oracle = 0;
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      const auto p = half.at(x, y);
      const bool isRed = p.r > 128 && p.g < 64 && p.b < 64;
      CHECK(m.get(x, y) == isRed);
      oracle += isRed;
    }
  }
  CHECK(m.count() == 50);
  CHECK(oracle == 50);

  const HueRange wrap{350, 10};
  CHECK(wrap.contains(355));
  CHECK(wrap.contains(5));
  CHECK_FALSE(wrap.contains(180));
}

TEST_CASE("extractContours") {
  CHECK(extractContours(BinaryMask(6, 6)).empty());

  BinaryMask sq(7, 7);
  for (int y = 2; y < 5; ++y) {
    for (int x = 2; x < 5; ++x) sq.set(x, y);
  }
  auto cs = extractContours(sq);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].area == 9);
  CHECK(cs[0].points.size() == 8);
  std::set<std::pair<int, int>> pts;
  for (auto p : cs[0].points) pts.insert({p.x, p.y});
  CHECK(pts.size() == 8);
  CHECK(pts.count({3, 3}) == 0);

  BinaryMask two(20, 10);
  for (int y = 1; y < 4; ++y) {
    for (int x = 1; x < 4; ++x) two.set(x, y);
  }
  for (int y = 2; y < 7; ++y) {
    for (int x = 10; x < 15; ++x) two.set(x, y);
  }
  cs = extractContours(two);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].area == 9);
  CHECK(cs[1].area == 25);

  CHECK(extractContours(two, 10).size() == 1);
}

TEST_CASE("contour points lie on the foreground boundary and areas match floods") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = randomMask(rng, 24, 18, 0.45);
    const auto cs = extractContours(m);
    for (const auto& c : cs) {
      for (auto p : c.points) {
        REQUIRE(m.get(p.x, p.y));
        bool touchesBackground = false;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx || dy) && !m.test(p.x + dx, p.y + dy)) touchesBackground = true;
          }
        }
        REQUIRE(touchesBackground);
      }
    }
    long total = 0, pixels = 0;
    for (const auto& c : cs) total += c.area;
    for (auto sz : floodSizes(m)) pixels += sz;
    CHECK(total >= pixels - 2 * static_cast<long>(floodSizes(m).size()));

    // Filling each contour covers its component, holes excepted.
    const auto comps = labelComponents(m);
    for (std::size_t id = 0; id < comps.info.size(); ++id) {
      const auto cm = comps.componentMask(static_cast<int>(id));
      const auto ccs = extractContours(cm);
      if (ccs.empty()) continue;
      std::vector<Point2> asPoints;
      for (auto q : ccs[0].points) asPoints.push_back({double(q.x), double(q.y)});
      if (signedArea(asPoints) == 0.0) {
        CHECK_THROWS_AS(rasterizePolygon(asPoints, m.width(), m.height()), Error);
        continue;
      }
      const auto fill = rasterizePolygon(std::span<const PixelPoint>(ccs[0].points), m.width(), m.height());
      for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
          if (cm.get(x, y)) REQUIRE(fill.get(x, y));
        }
      }
    }
  }
}

TEST_CASE("contour area matches flood size for solid blobs") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> coord(3, 36), rad(1, 6);
  for (int trial = 0; trial < 50; ++trial) {
    BinaryMask m(40, 40);
    const int cx = coord(rng), cy = coord(rng), r = rad(rng);
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 40; ++x) {
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.set(x, y);
      }
    }
    const auto cs = extractContours(m);
    const auto sizes = floodSizes(m);
    REQUIRE(cs.size() == sizes.size());
    CHECK(cs[0].area == sizes[0]);
  }
}

TEST_CASE("contour area includes holes") {
  BinaryMask ring(9, 9);
  for (int y = 1; y < 8; ++y) {
    for (int x = 1; x < 8; ++x) ring.set(x, y, x == 1 || x == 7 || y == 1 || y == 7);
  }
  const auto cs = extractContours(ring);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].area == 49);
}

TEST_CASE("largestContour") {
  CHECK_THROWS_AS(largestContour(std::vector<Contour>{}), Error);
  Contour a{{{0, 0}, {1, 0}, {1, 1}}, 9}, b{{{5, 5}, {6, 5}, {6, 6}}, 25};
  std::vector<Contour> v{a, b};
  CHECK(largestContour(v).area == 25);
  std::vector<Contour> one{a};
  CHECK(largestContour(one).area == 9);

  BinaryMask m(12, 12);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) {
      m.set(5 + x, 5 + y);
      m.set(1 + x, 1 + y);
    }
  }
  const auto cs = extractContours(m);
  const auto best = largestContour(cs);
  CHECK(best.points.front() == PixelPoint{1, 1});
}

TEST_CASE("rasterizePolygon") {
  std::vector<Point2> sq{{1, 1}, {4, 1}, {4, 4}, {1, 4}};
  CHECK(rasterizePolygon(sq, 8, 8).count() == 16);
  std::vector<Point2> outside{{-10, -10}, {-5, -10}, {-5, -5}};
  CHECK(rasterizePolygon(outside, 8, 8).count() == 0);
  std::vector<Point2> full{{-0.5, -0.5}, {7.5, -0.5}, {7.5, 7.5}, {-0.5, 7.5}};
  CHECK(rasterizePolygon(full, 8, 8).count() == 64);
}

TEST_CASE("rasterizePolygon agrees with the per-pixel oracle") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> c(-5.0, 35.0);
  std::uniform_int_distribution<int> ic(-3, 33);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point2> poly;
    const int n = 3 + trial % 6;
    for (int i = 0; i < n; ++i) {
      if (trial % 2) {
        poly.push_back({c(rng), c(rng)});
      } else {
        poly.push_back({double(ic(rng)), double(ic(rng))});
      }
    }
    const auto m = rasterizePolygon(poly, 30, 30);
    double x0 = 1e9, y0 = 1e9, x1 = -1e9, y1 = -1e9;
    for (auto p : poly) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
    for (int y = 0; y < 30; ++y) {
      for (int x = 0; x < 30; ++x) REQUIRE(m.get(x, y) == oracleInside(poly, x, y));
    }
    if (m.any()) {
      const auto bb = boundingBox(m);
      CHECK(bb.x >= x0);
      CHECK(bb.y >= y0);
      CHECK(bb.right() - 1 <= x1);
      CHECK(bb.bottom() - 1 <= y1);
    }
  }
}

TEST_CASE("boundingBox") {
  BinaryMask m(10, 10);
  CHECK_THROWS_AS(boundingBox(m), Error);
  m.set(3, 7);
  CHECK(boundingBox(m) == PixelRect{3, 7, 1, 1});
  BinaryMask m2(10, 10);
  m2.set(1, 1);
  m2.set(4, 6);
  CHECK(boundingBox(m2) == PixelRect{1, 1, 4, 6});

  std::mt19937 rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto r = randomMask(rng, 20, 20, 0.03);
    if (!r.any()) continue;
    int x0 = 99, y0 = 99, x1 = -1, y1 = -1;
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 20; ++x) {
        if (r.get(x, y)) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
        }
      }
    }
    CHECK(boundingBox(r) == PixelRect{x0, y0, x1 - x0 + 1, y1 - y0 + 1});
  }
}

TEST_CASE("crop") {
  std::mt19937 rng(9);
  const auto img = randomImage(rng, 4, 4);
  CHECK(crop(img, {0, 0, 4, 4}, 0) == img);
  const auto tl = crop(img, {0, 0, 2, 2}, 0);
  REQUIRE(tl.width() == 2);
  CHECK(tl.at(1, 1) == img.at(1, 1));

  const auto big = randomImage(rng, 30, 20);
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<int> px(-5, 34), sz(1, 12), pad(0, 6);
    const PixelRect r{px(rng), px(rng) % 24, sz(rng), sz(rng)};
    const int p = pad(rng);
    const int x0 = std::max(0, r.x - p), y0 = std::max(0, r.y - p);
    const int x1 = std::min(30, r.x + r.w + p), y1 = std::min(20, r.y + r.h + p);
    const bool misses = r.x >= 30 || r.y >= 20 || r.x + r.w <= 0 || r.y + r.h <= 0;
    if (misses) {
      CHECK_THROWS_AS(crop(big, r, p), Error);
      continue;
    }
    const auto c = crop(big, r, p);
    REQUIRE(c.width() == x1 - x0);
    REQUIRE(c.height() == y1 - y0);
    for (int y = 0; y < c.height(); ++y) {
      for (int x = 0; x < c.width(); ++x) REQUIRE(c.at(x, y) == big.at(x0 + x, y0 + y));
    }
  }
}

TEST_CASE("base64 RFC 4648 vectors") {
  auto enc = [](std::string s) {
    return base64Encode(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  };
  CHECK(enc("") == "");
  CHECK(enc("f") == "Zg==");
  CHECK(enc("fo") == "Zm8=");
  CHECK(enc("foo") == "Zm9v");
  CHECK(enc("foob") == "Zm9vYg==");
  CHECK(enc("fooba") == "Zm9vYmE=");
  CHECK(enc("foobar") == "Zm9vYmFy");
  const auto d = base64Decode("Zm9vYmE=");
  CHECK(std::string(d.begin(), d.end()) == "fooba");
  CHECK_THROWS_AS(base64Decode("Zm9"), Error);
  CHECK_THROWS_AS(base64Decode("Zm9*"), Error);
  CHECK_THROWS_AS(base64Decode("Z==="), Error);
}

TEST_CASE("png round trip is lossless") {
  std::mt19937 rng(21);
  for (int t = 0; t < 25; ++t) {
    const auto img = randomImage(rng, 1 + t % 9, 1 + (t * 7) % 13);
    const auto bytes = encodePng(img);
    REQUIRE(bytes.size() > 8);
    CHECK(bytes[0] == 0x89);
    CHECK(bytes[1] == 'P');
    CHECK(decodePng(bytes) == img);
  }
  std::vector<std::uint8_t> junk{1, 2, 3, 4, 5};
  CHECK_THROWS_AS(decodePng(junk), Error);
}
