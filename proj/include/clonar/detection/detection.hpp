#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "clonar/imaging/raster.hpp"
#include "clonar/lasso/lasso.hpp"

namespace clonar::detection {

using imaging::BinaryMask;
using imaging::PixelRect;
using imaging::RasterImage;

enum class BackendKind { External, Reference };

BackendKind parseBackendKind(const std::string& name);
std::string toString(BackendKind kind);

struct DetectorConfig {
  double confidenceThreshold = 0.5;
  BackendKind backend = BackendKind::Reference;
  std::string externalUrl;
  int timeoutMs = 30000;
  int cropPaddingPx = 4;
  /// Minimum share of an object's mask inside the zone for it to count.
  double zoneFraction = 0.5;
};

/// One backend detection in full-frame coordinates, before filtering.
struct RawDetection {
  std::string label;
  double confidence = 0.0;
  BinaryMask mask;
};

struct DetectedObject {
  std::string id;
  std::string label;
  double confidence = 0.0;
  PixelRect bbox;
  BinaryMask mask;   // full-frame
  RasterImage crop;  // RGBA, background alpha 0
};

struct ObjectPayload {
  std::string label;
  std::string pngBase64;
  int widthPx = 0;
  int heightPx = 0;
};

/// Instance-segmentation backend. Implementations must be reentrant.
class SegmentationBackend {
 public:
  virtual ~SegmentationBackend() = default;
  virtual std::vector<RawDetection> detect(const RasterImage& img, std::stop_token stop) = 0;
  virtual std::string name() const = 0;
};

struct ReferenceSegmenterConfig {
  double sMin = 0.4;
  double vMin = 0.3;
  imaging::ColorThresholds excluded = imaging::ColorThresholds::strokeRed();
  long minComponentArea = 25;
};

/// Deterministic colour-blob segmenter: 8-connected components of saturated,
/// bright, non-stroke pixels, labelled by the nearest named hue.
class ReferenceSegmenter final : public SegmentationBackend {
 public:
  explicit ReferenceSegmenter(ReferenceSegmenterConfig cfg = {}) : cfg_(std::move(cfg)) {}
  std::vector<RawDetection> detect(const RasterImage& img, std::stop_token stop) override;
  std::string name() const override { return "reference"; }

 private:
  ReferenceSegmenterConfig cfg_;
};

/// Nearest entry of the 12-hue named colour table (30 degree spacing).
std::string nearestColorName(double hueDegrees);

/// Mean hue of the mask's pixels on the colour circle.
double circularMeanHue(const RasterImage& img, const BinaryMask& mask);

/// Unique opaque object token.
std::string newObjectId();

/// Crop of boundingBox(mask) + padding; mask pixels opaque, the rest (0,0,0,0).
/// Throws EmptyMask.
RasterImage isolateObject(const RasterImage& img, const BinaryMask& mask, int paddingPx);

/// Runs the backend and applies the confidence and zone filters. Output is
/// ordered by descending confidence, then bbox raster order.
std::vector<DetectedObject> segment(const RasterImage& img,
                                    const std::optional<lasso::LassoPolygon>& zone,
                                    const DetectorConfig& cfg, SegmentationBackend& backend,
                                    std::stop_token stop = {});

/// Builds the backend named by cfg.backend.
std::unique_ptr<SegmentationBackend> makeBackend(const DetectorConfig& cfg);

/// Referenced-backend convenience: segment(img, zone, cfg, ReferenceSegmenter{}).
std::vector<DetectedObject> referenceSegment(const RasterImage& img);

/// Throws EncodingFailure.
ObjectPayload encodePayload(const DetectedObject& obj);
RasterImage decodePayload(const ObjectPayload& payload);

}  // namespace clonar::detection
