#include "clonar/server/config.hpp"

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "clonar/error.hpp"

namespace clonar::server {

using nlohmann::json;

ServerConfig parseConfig(const std::string& jsonText) {
  ServerConfig cfg;
  try {
    const json doc = json::parse(jsonText);
    if (doc.contains("server")) {
      const auto& s = doc["server"];
      cfg.host = s.value("host", cfg.host);
      cfg.port = s.value("port", cfg.port);
    }
    if (doc.contains("detector")) {
      const auto& d = doc["detector"];
      if (d.contains("backend")) cfg.detector.backend = detection::parseBackendKind(d["backend"]);
      cfg.detector.externalUrl = d.value("url", cfg.detector.externalUrl);
      cfg.detector.confidenceThreshold =
          d.value("confidence_threshold", cfg.detector.confidenceThreshold);
      cfg.detector.timeoutMs = d.value("timeout_ms", cfg.detector.timeoutMs);
      cfg.detector.cropPaddingPx = d.value("crop_padding_px", cfg.detector.cropPaddingPx);
      cfg.detector.zoneFraction = d.value("zone_fraction", cfg.detector.zoneFraction);
    }
    if (doc.contains("lasso")) {
      const auto& l = doc["lasso"];
      cfg.lasso.minZoneAreaPx = l.value("min_zone_area_px", cfg.lasso.minZoneAreaPx);
      cfg.lasso.mergeDistancePx = l.value("merge_distance_px", cfg.lasso.mergeDistancePx);
      cfg.minStrokeContourArea = l.value("min_contour_area_px", cfg.minStrokeContourArea);
    }
    if (doc.contains("generator")) {
      const auto& g = doc["generator"];
      if (g.contains("backend")) cfg.generator.defaultBackend = generation::parseGeneratorKind(g["backend"]);
      cfg.generator.externalUrl = g.value("url", cfg.generator.externalUrl);
      cfg.generator.timeoutMs = g.value("timeout_ms", cfg.generator.timeoutMs);
      cfg.generator.pollIntervalMs = g.value("poll_interval_ms", cfg.generator.pollIntervalMs);
      cfg.generator.workers = g.value("workers", cfg.generator.workers);
      cfg.generator.queueCapacity = g.value("queue_capacity", cfg.generator.queueCapacity);
    }
    if (doc.contains("mesh")) {
      cfg.targetVertices = doc["mesh"].value("target_vertices", cfg.targetVertices);
    }
    if (doc.contains("session")) {
      const auto& s = doc["session"];
      cfg.sessionTtl = std::chrono::seconds(s.value("ttl_seconds", cfg.sessionTtl.count()));
      cfg.maxSessions = s.value("max_sessions", cfg.maxSessions);
    }
    if (doc.contains("assets") && doc["assets"].contains("dir")) {
      cfg.assetDir = doc["assets"]["dir"].get<std::string>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  if (cfg.detector.confidenceThreshold < 0.0 || cfg.detector.confidenceThreshold > 1.0) {
    fail(ErrorCode::InvalidArgument, "confidence_threshold must lie in [0,1]");
  }
  if (cfg.detector.timeoutMs <= 0 || cfg.generator.timeoutMs <= 0) {
    fail(ErrorCode::InvalidArgument, "timeouts must be positive");
  }
  if (cfg.targetVertices < 4) fail(ErrorCode::InvalidArgument, "mesh.target_vertices must be >= 4");
  if (cfg.generator.workers <= 0) fail(ErrorCode::InvalidArgument, "generator.workers must be positive");
  return cfg;
}

void applyEnvironment(ServerConfig& cfg) {
  auto env = [](const char* name) -> const char* {
    const char* v = std::getenv(name);
    return (v && *v) ? v : nullptr;
  };
  try {
    if (auto v = env("CLONAR_HOST")) cfg.host = v;
    if (auto v = env("CLONAR_PORT")) cfg.port = std::stoi(v);
    if (auto v = env("CLONAR_DETECTOR_BACKEND")) cfg.detector.backend = detection::parseBackendKind(v);
    if (auto v = env("CLONAR_DETECTOR_URL")) cfg.detector.externalUrl = v;
    if (auto v = env("CLONAR_CONFIDENCE_THRESHOLD")) cfg.detector.confidenceThreshold = std::stod(v);
    if (auto v = env("CLONAR_GENERATOR_BACKEND")) cfg.generator.defaultBackend = generation::parseGeneratorKind(v);
    if (auto v = env("CLONAR_GENERATOR_URL")) cfg.generator.externalUrl = v;
    if (auto v = env("CLONAR_TARGET_VERTICES")) cfg.targetVertices = std::stoul(v);
    if (auto v = env("CLONAR_WORKERS")) cfg.generator.workers = std::stoi(v);
    if (auto v = env("CLONAR_ASSET_DIR")) cfg.assetDir = v;
  } catch (const std::logic_error& e) {
    fail(ErrorCode::InvalidArgument, std::string("environment override: ") + e.what());
  }
}

ServerConfig loadConfig(const std::string& path) {
  ServerConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::InvalidArgument, "cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = parseConfig(ss.str());
  }
  applyEnvironment(cfg);
  return cfg;
}

}  // namespace clonar::server
