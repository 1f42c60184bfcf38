#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <stop_token>
#include <string>

#include "clonar/detection/detection.hpp"
#include "clonar/generation/extrude.hpp"
#include "clonar/generation/mesh.hpp"

namespace clonar::generation {

enum class GeneratorKind { External, Stub };

GeneratorKind parseGeneratorKind(const std::string& name);
std::string toString(GeneratorKind kind);

struct GenerationRequest {
  detection::ObjectPayload payload;
  std::map<std::string, std::string> params;  // passed through to the backend
  std::chrono::system_clock::time_point requestedAt = std::chrono::system_clock::now();
};

class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  /// Blocking; throws clonar::Error on failure.
  virtual Mesh generate(const GenerationRequest& req, std::stop_token stop) = 0;
  virtual std::string name() const = 0;
};

/// Extrudes the payload's opaque pixels.
class StubGenerator final : public GeneratorBackend {
 public:
  explicit StubGenerator(ExtrudeOptions opts = {}) : opts_(opts) {}
  Mesh generate(const GenerationRequest& req, std::stop_token stop) override;
  std::string name() const override { return "stub"; }

 private:
  ExtrudeOptions opts_;
};

/// Client for the v1 generator contract:
///   POST {baseUrl}/v1/generate  {"version":"v1","label","width","height",
///                                "image_png_base64","params":{...}}
///     -> 200/202 {"job_id": "..."}
///   GET  {baseUrl}/v1/generate/{job_id}
///     -> {"state":"queued"|"running"|"succeeded"|"failed","obj"?: "...","error"?: "..."}
class ExternalGenerator final : public GeneratorBackend {
 public:
  ExternalGenerator(std::string baseUrl, int timeoutMs = 120000, int pollIntervalMs = 500);
  Mesh generate(const GenerationRequest& req, std::stop_token stop) override;
  std::string name() const override { return "external"; }

 private:
  std::string baseUrl_;
  int timeoutMs_;
  int pollIntervalMs_;
};

}  // namespace clonar::generation
