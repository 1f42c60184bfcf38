#include "clonar/generation/generators.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <thread>

#include "../http_endpoint.hpp"
#include "clonar/error.hpp"
#include "clonar/meshops/assets.hpp"

namespace clonar::generation {

using nlohmann::json;

GeneratorKind parseGeneratorKind(const std::string& name) {
  if (name == "stub") return GeneratorKind::Stub;
  if (name == "external") return GeneratorKind::External;
  fail(ErrorCode::InvalidArgument, "unknown generator backend '" + name + "'");
}

std::string toString(GeneratorKind kind) {
  return kind == GeneratorKind::Stub ? "stub" : "external";
}

Mesh StubGenerator::generate(const GenerationRequest& req, std::stop_token) {
  const auto img = detection::decodePayload(req.payload);
  BinaryMask mask(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img.at(x, y).a > 0) mask.set(x, y);
    }
  }
  return stubExtrude(mask, opts_);
}

ExternalGenerator::ExternalGenerator(std::string baseUrl, int timeoutMs, int pollIntervalMs)
    : baseUrl_(std::move(baseUrl)), timeoutMs_(timeoutMs), pollIntervalMs_(pollIntervalMs) {
  if (baseUrl_.empty()) fail(ErrorCode::InvalidArgument, "external generator URL is empty");
  if (timeoutMs_ <= 0 || pollIntervalMs_ <= 0) {
    fail(ErrorCode::InvalidArgument, "generator timeouts must be positive");
  }
}

Mesh ExternalGenerator::generate(const GenerationRequest& req, std::stop_token stop) {
  const auto endpoint = net::splitUrl(baseUrl_);
  httplib::Client cli(endpoint.origin);
  const auto timeout = std::chrono::milliseconds(timeoutMs_);
  const auto perRequest = std::min(timeout, std::chrono::milliseconds(30000));
  cli.set_connection_timeout(perRequest);
  cli.set_read_timeout(perRequest);
  cli.set_write_timeout(perRequest);
  std::stop_callback onStop(stop, [&cli] { cli.stop(); });

  auto check = [&](const httplib::Result& res, const char* what) {
    if (!res) {
      if (res.error() == httplib::Error::ConnectionTimeout) {
        fail(ErrorCode::BackendTimeout, std::string(what) + " timed out");
      }
      fail(ErrorCode::BackendUnavailable,
           std::string(what) + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200 && res->status != 202) {
      fail(ErrorCode::BackendUnavailable, std::string(what) + " returned HTTP " +
                                              std::to_string(res->status));
    }
  };

  const json body = {
      {"version", "v1"},
      {"label", req.payload.label},
      {"width", req.payload.widthPx},
      {"height", req.payload.heightPx},
      {"image_png_base64", req.payload.pngBase64},
      {"params", req.params},
  };
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  auto submitted = cli.Post(endpoint.pathPrefix + "/v1/generate", body.dump(), "application/json");
  check(submitted, "generator submit");

  std::string remoteId;
  try {
    remoteId = json::parse(submitted->body).at("job_id").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedBackendResponse, std::string("generator submit response: ") + e.what());
  }

  while (!stop.stop_requested()) {
    auto polled = cli.Get(endpoint.pathPrefix + "/v1/generate/" + remoteId);
    check(polled, "generator poll");
    std::string state;
    json doc;
    try {
      doc = json::parse(polled->body);
      state = doc.at("state").get<std::string>();
    } catch (const json::exception& e) {
      fail(ErrorCode::MalformedBackendResponse, std::string("generator poll response: ") + e.what());
    }
    if (state == "succeeded") {
      try {
        return meshops::importObj(doc.at("obj").get<std::string>());
      } catch (const json::exception& e) {
        fail(ErrorCode::MalformedBackendResponse, std::string("generator result: ") + e.what());
      } catch (const Error& e) {
        fail(ErrorCode::MalformedBackendResponse, std::string("generator OBJ: ") + e.what());
      }
    }
    if (state == "failed") {
      fail(ErrorCode::BackendUnavailable, "generator reported failure: " + doc.value("error", std::string("unknown")));
    }
    if (state != "queued" && state != "running") {
      fail(ErrorCode::MalformedBackendResponse, "generator reported unknown state '" + state + "'");
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      fail(ErrorCode::BackendTimeout, "generator did not finish within " + std::to_string(timeoutMs_) + " ms");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(pollIntervalMs_));
  }
  fail(ErrorCode::BackendUnavailable, "generation cancelled");
}

}  // namespace clonar::generation
