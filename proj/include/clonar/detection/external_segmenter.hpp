#pragma once

#include <atomic>
#include <string>

#include "clonar/detection/detection.hpp"

namespace clonar::detection {

/// Client for the v1 detector contract:
///   POST {baseUrl}/v1/segment  {"version":"v1","width","height","image_png_base64"}
///   200 {"version":"v1","detections":[{"label","confidence","bbox":[x,y,w,h],
///        "rle_mask":{"size":[h,w],"counts":[...]}}], "latency_ms"?}
class ExternalSegmenter final : public SegmentationBackend {
 public:
  ExternalSegmenter(std::string baseUrl, int timeoutMs);
  std::vector<RawDetection> detect(const RasterImage& img, std::stop_token stop) override;
  std::string name() const override { return "external"; }

  /// Latency reported by the backend on the last successful call, if any.
  double lastReportedLatencyMs() const { return lastLatencyMs_.load(); }

 private:
  std::string baseUrl_;
  int timeoutMs_;
  std::atomic<double> lastLatencyMs_{-1.0};
};

/// Parses a v1 detector response body. Throws MalformedBackendResponse.
std::vector<RawDetection> parseDetectorResponse(const std::string& body, int width, int height);

}  // namespace clonar::detection
