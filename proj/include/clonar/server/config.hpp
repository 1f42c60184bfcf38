#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>

#include "clonar/detection/detection.hpp"
#include "clonar/generation/generators.hpp"
#include "clonar/lasso/lasso.hpp"

namespace clonar::server {

struct GeneratorSettings {
  generation::GeneratorKind defaultBackend = generation::GeneratorKind::Stub;
  std::string externalUrl;
  int timeoutMs = 120000;
  int pollIntervalMs = 500;
  int workers = 2;
  std::size_t queueCapacity = 64;
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  detection::DetectorConfig detector;
  lasso::LassoConfig lasso;
  long minStrokeContourArea = 25;
  GeneratorSettings generator;
  std::size_t targetVertices = 2048;
  std::chrono::seconds sessionTtl{600};
  std::size_t maxSessions = 64;
  int thumbnailMaxSide = 128;
  std::optional<std::string> assetDir;
};

/// Parses the JSON config document; missing keys keep their defaults.
/// Throws InvalidArgument.
ServerConfig parseConfig(const std::string& jsonText);

/// Reads the file (when path is non-empty) and then applies CLONAR_* environment
/// overrides.
ServerConfig loadConfig(const std::string& path);

/// CLONAR_HOST, CLONAR_PORT, CLONAR_DETECTOR_BACKEND, CLONAR_DETECTOR_URL,
/// CLONAR_CONFIDENCE_THRESHOLD, CLONAR_GENERATOR_BACKEND, CLONAR_GENERATOR_URL,
/// CLONAR_TARGET_VERTICES, CLONAR_WORKERS, CLONAR_ASSET_DIR.
void applyEnvironment(ServerConfig& cfg);

}  // namespace clonar::server
