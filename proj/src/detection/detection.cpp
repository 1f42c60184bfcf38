#include "clonar/detection/detection.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "clonar/detection/external_segmenter.hpp"
#include "clonar/error.hpp"
#include "clonar/imaging/codec.hpp"

namespace clonar::detection {

BackendKind parseBackendKind(const std::string& name) {
  if (name == "external") return BackendKind::External;
  if (name == "reference") return BackendKind::Reference;
  fail(ErrorCode::InvalidArgument, "unknown detector backend '" + name + "'");
}

std::string toString(BackendKind kind) {
  return kind == BackendKind::External ? "external" : "reference";
}

namespace {

struct NamedHue {
  const char* name;
  double hue;
};

constexpr std::array<NamedHue, 12> kColorTable = {{
    {"red", 0.0},
    {"orange", 30.0},
    {"yellow", 60.0},
    {"chartreuse", 90.0},
    {"green", 120.0},
    {"spring-green", 150.0},
    {"cyan", 180.0},
    {"azure", 210.0},
    {"blue", 240.0},
    {"violet", 270.0},
    {"magenta", 300.0},
    {"rose", 330.0},
}};

double hueDistance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 360.0 - d);
}

}  // namespace

std::string nearestColorName(double hueDegrees) {
  const NamedHue* best = &kColorTable.front();
  for (const auto& entry : kColorTable) {
    if (hueDistance(hueDegrees, entry.hue) < hueDistance(hueDegrees, best->hue)) best = &entry;
  }
  return best->name;
}

double circularMeanHue(const RasterImage& img, const BinaryMask& mask) {
  double sx = 0.0, sy = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!mask.get(x, y)) continue;
      const double rad = imaging::rgbToHsv(img.at(x, y)).h * std::numbers::pi / 180.0;
      sx += std::cos(rad);
      sy += std::sin(rad);
    }
  }
  double deg = std::atan2(sy, sx) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  return deg;
}

std::string newObjectId() {
  static std::atomic<std::uint64_t> counter{0};
  static const std::uint64_t salt = std::random_device{}();
  const std::uint64_t n = counter.fetch_add(1) + 1;
  char buf[40];
  std::snprintf(buf, sizeof buf, "obj-%08llx-%06llu",
                static_cast<unsigned long long>(salt & 0xffffffffULL),
                static_cast<unsigned long long>(n));
  return buf;
}

std::vector<RawDetection> ReferenceSegmenter::detect(const RasterImage& img, std::stop_token stop) {
  BinaryMask candidates(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto hsv = imaging::rgbToHsv(img.at(x, y));
      if (hsv.s >= cfg_.sMin && hsv.v >= cfg_.vMin && !cfg_.excluded.matches(hsv)) {
        candidates.set(x, y);
      }
    }
  }

  const auto comps = imaging::labelComponents(candidates);
  std::vector<RawDetection> out;
  for (int id = 0; id < static_cast<int>(comps.info.size()); ++id) {
    if (stop.stop_requested()) break;
    if (comps.info[static_cast<std::size_t>(id)].pixelCount < cfg_.minComponentArea) continue;
    RawDetection d;
    d.mask = comps.componentMask(id);
    d.label = nearestColorName(circularMeanHue(img, d.mask));
    d.confidence = 1.0;
    out.push_back(std::move(d));
  }
  return out;
}

RasterImage isolateObject(const RasterImage& img, const BinaryMask& mask, int paddingPx) {
  if (mask.width() != img.width() || mask.height() != img.height()) {
    fail(ErrorCode::InvalidArgument, "mask and image dimensions differ");
  }
  const PixelRect box = imaging::boundingBox(mask);  // throws EmptyMask
  const PixelRect r = imaging::padAndClamp(box, paddingPx, img.width(), img.height());
  RasterImage out(r.w, r.h, imaging::Rgba{0, 0, 0, 0});
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) {
      if (mask.get(r.x + x, r.y + y)) {
        auto p = img.at(r.x + x, r.y + y);
        p.a = 255;
        out.at(x, y) = p;
      }
    }
  }
  return out;
}

std::vector<DetectedObject> segment(const RasterImage& img,
                                    const std::optional<lasso::LassoPolygon>& zone,
                                    const DetectorConfig& cfg, SegmentationBackend& backend,
                                    std::stop_token stop) {
  const double threshold = std::clamp(cfg.confidenceThreshold, 0.0, 1.0);
  auto raws = backend.detect(img, stop);

  std::vector<DetectedObject> objects;
  for (auto& raw : raws) {
    if (raw.mask.width() != img.width() || raw.mask.height() != img.height()) {
      fail(ErrorCode::MalformedBackendResponse, "detection mask does not match the frame size");
    }
    if (!(raw.confidence >= threshold) || !raw.mask.any()) continue;
    if (zone && lasso::maskInsideFraction(*zone, raw.mask) < cfg.zoneFraction) continue;

    DetectedObject obj;
    obj.id = newObjectId();
    obj.label = std::move(raw.label);
    obj.confidence = raw.confidence;
    obj.bbox = imaging::boundingBox(raw.mask);
    obj.crop = isolateObject(img, raw.mask, cfg.cropPaddingPx);
    obj.mask = std::move(raw.mask);
    objects.push_back(std::move(obj));
  }

  std::stable_sort(objects.begin(), objects.end(),
                   [](const DetectedObject& a, const DetectedObject& b) {
                     if (a.confidence != b.confidence) return a.confidence > b.confidence;
                     if (a.bbox.y != b.bbox.y) return a.bbox.y < b.bbox.y;
                     return a.bbox.x < b.bbox.x;
                   });
  return objects;
}

std::unique_ptr<SegmentationBackend> makeBackend(const DetectorConfig& cfg) {
  if (cfg.backend == BackendKind::External) {
    return std::make_unique<ExternalSegmenter>(cfg.externalUrl, cfg.timeoutMs);
  }
  return std::make_unique<ReferenceSegmenter>();
}

std::vector<DetectedObject> referenceSegment(const RasterImage& img) {
  ReferenceSegmenter backend;
  return segment(img, std::nullopt, DetectorConfig{}, backend);
}

ObjectPayload encodePayload(const DetectedObject& obj) {
  ObjectPayload p;
  p.label = obj.label;
  p.pngBase64 = imaging::base64Encode(imaging::encodePng(obj.crop));
  p.widthPx = obj.crop.width();
  p.heightPx = obj.crop.height();
  return p;
}

RasterImage decodePayload(const ObjectPayload& payload) {
  RasterImage img = imaging::decodePng(imaging::base64Decode(payload.pngBase64));
  if (img.width() != payload.widthPx || img.height() != payload.heightPx) {
    fail(ErrorCode::MalformedImage, "payload dimensions do not match the embedded PNG");
  }
  return img;
}

}  // namespace clonar::detection
