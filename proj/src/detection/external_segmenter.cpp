#include "clonar/detection/external_segmenter.hpp"

#include <httplib.h>

#include <chrono>
#include <nlohmann/json.hpp>

#include "../http_endpoint.hpp"
#include "clonar/detection/rle.hpp"
#include "clonar/error.hpp"
#include "clonar/imaging/codec.hpp"

namespace clonar::detection {

using nlohmann::json;

ExternalSegmenter::ExternalSegmenter(std::string baseUrl, int timeoutMs)
    : baseUrl_(std::move(baseUrl)), timeoutMs_(timeoutMs) {
  if (baseUrl_.empty()) fail(ErrorCode::InvalidArgument, "external detector URL is empty");
  if (timeoutMs_ <= 0) fail(ErrorCode::InvalidArgument, "detector timeout must be positive");
}

std::vector<RawDetection> parseDetectorResponse(const std::string& body, int width, int height) {
  try {
    const json doc = json::parse(body);
    if (doc.value("version", std::string("v1")) != "v1") {
      fail(ErrorCode::MalformedBackendResponse, "unsupported detector response version");
    }
    std::vector<RawDetection> out;
    for (const auto& d : doc.at("detections")) {
      RawDetection raw;
      raw.label = d.at("label").get<std::string>();
      raw.confidence = d.at("confidence").get<double>();
      if (!(raw.confidence >= 0.0 && raw.confidence <= 1.0)) {
        fail(ErrorCode::MalformedBackendResponse, "confidence outside [0,1]");
      }
      const auto& rle = d.at("rle_mask");
      if (rle.contains("size")) {
        const auto size = rle.at("size").get<std::vector<int>>();
        if (size.size() != 2 || size[0] != height || size[1] != width) {
          fail(ErrorCode::MalformedBackendResponse, "rle_mask size does not match the frame");
        }
      }
      const auto counts = rle.at("counts").get<std::vector<std::uint32_t>>();
      raw.mask = rleDecode(counts, width, height);
      out.push_back(std::move(raw));
    }
    return out;
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedBackendResponse, std::string("detector response: ") + e.what());
  }
}

std::vector<RawDetection> ExternalSegmenter::detect(const RasterImage& img, std::stop_token stop) {
  const auto endpoint = net::splitUrl(baseUrl_);
  httplib::Client cli(endpoint.origin);
  const auto timeout = std::chrono::milliseconds(timeoutMs_);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  std::stop_callback onStop(stop, [&cli] { cli.stop(); });

  const json request = {
      {"version", "v1"},
      {"width", img.width()},
      {"height", img.height()},
      {"image_png_base64", imaging::base64Encode(imaging::encodePng(img))},
  };
  const auto started = std::chrono::steady_clock::now();
  auto res = cli.Post(endpoint.pathPrefix + "/v1/segment", request.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= timeout * 9 / 10)) {
      fail(ErrorCode::BackendTimeout, "detector did not answer within " +
                                          std::to_string(timeoutMs_) + " ms");
    }
    fail(ErrorCode::BackendUnavailable, "detector request failed: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    fail(ErrorCode::BackendUnavailable, "detector returned HTTP " + std::to_string(res->status));
  }
  auto detections = parseDetectorResponse(res->body, img.width(), img.height());
  try {
    const auto doc = json::parse(res->body);
    if (doc.contains("latency_ms")) lastLatencyMs_ = doc["latency_ms"].get<double>();
  } catch (const json::exception&) {
  }
  return detections;
}

}  // namespace clonar::detection
