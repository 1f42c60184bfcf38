#include "clonar/server/http_api.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "clonar/imaging/codec.hpp"

namespace clonar::server {

using nlohmann::json;

int httpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return 400;
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownObject:
    case ErrorCode::UnknownJob: return 404;
    case ErrorCode::IllegalTransition:
    case ErrorCode::NotDetectedYet:
    case ErrorCode::NotReady: return 409;
    case ErrorCode::SessionExpired: return 410;
    case ErrorCode::MalformedImage:
    case ErrorCode::StrokeTooShort:
    case ErrorCode::ZoneTooSmall:
    case ErrorCode::EmptyMask:
    case ErrorCode::EmptyContourSet:
    case ErrorCode::DegeneratePolygon:
    case ErrorCode::RectOutOfBounds:
    case ErrorCode::DegenerateSilhouette: return 422;
    case ErrorCode::QueueFull:
    case ErrorCode::SessionLimitReached: return 503;
    case ErrorCode::BackendUnavailable:
    case ErrorCode::MalformedBackendResponse: return 502;
    case ErrorCode::BackendTimeout: return 504;
    default: return 500;
  }
}

namespace {

json rectJson(const imaging::PixelRect& r) { return {r.x, r.y, r.w, r.h}; }

json jobJson(const JobView& v) {
  const auto& j = v.job;
  json out = {{"job_id", j.jobId},
              {"label", j.label},
              {"backend", generation::toString(j.backend)},
              {"state", generation::toString(j.state)}};
  if (j.error) out["error"] = *j.error;
  json t = json::object();
  if (j.timings.conversionMs) t["conversion_ms"] = *j.timings.conversionMs;
  if (j.timings.simplifyMs) t["simplify_ms"] = *j.timings.simplifyMs;
  if (j.timings.exportMs) t["export_ms"] = *j.timings.exportMs;
  out["timings"] = std::move(t);
  if (j.result) {
    out["vertex_count"] = j.result->vertices.size();
    out["face_count"] = j.result->faces.size();
  }
  if (v.assetBytes) {
    out["asset_bytes"] = *v.assetBytes;
    out["asset_url"] = "/v1/jobs/" + j.jobId + "/asset";
  }
  return out;
}

std::optional<double> optionalNumber(const json& body, const char* key) {
  if (!body.contains(key) || body[key].is_null()) return std::nullopt;
  if (!body[key].is_number()) fail(ErrorCode::InvalidArgument, std::string(key) + " must be a number");
  return body[key].get<double>();
}

json parseBody(const httplib::Request& req, bool allowEmpty) {
  if (req.body.empty()) {
    if (allowEmpty) return json::object();
    fail(ErrorCode::InvalidArgument, "request body is empty");
  }
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    fail(ErrorCode::InvalidArgument, "request body must be a JSON object");
  }
  return body;
}

void sendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void sendError(httplib::Response& res, int status, std::string_view code, const std::string& msg) {
  sendJson(res, status, {{"error", {{"code", code}, {"message", msg}}}});
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      sendError(res, httpStatus(e.code()), toString(e.code()), e.what());
    } catch (const json::exception& e) {
      sendError(res, 400, toString(ErrorCode::InvalidArgument), e.what());
    } catch (const std::exception& e) {
      sendError(res, 500, "Internal", e.what());
    }
  };
}

}  // namespace

struct HttpApi::Impl {
  PipelineService& svc;
  httplib::Server server;

  explicit Impl(PipelineService& s) : svc(s) { routes(); }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.set_payload_max_length(64 * 1024 * 1024);
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
      sendJson(res, 200, {{"status", "ok"}});
    });

    server.Post("/v1/captures", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parseBody(req, false);
      if (!body.contains("image_png_base64") || !body["image_png_base64"].is_string()) {
        fail(ErrorCode::InvalidArgument, "image_png_base64 is required");
      }
      const CaptureMode mode = parseCaptureMode(body.value("mode", std::string("zone")));
      std::vector<std::uint8_t> png;
      try {
        png = imaging::base64Decode(body["image_png_base64"].get<std::string>());
      } catch (const Error& e) {
        fail(ErrorCode::MalformedImage, e.what());
      }
      const std::string id = svc.createCapture(png, mode);
      sendJson(res, 201, sessionJson(svc.session(id)));
    }));

    server.Get(R"(/v1/captures/([^/]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 sendJson(res, 200, sessionJson(svc.session(req.matches[1])));
               }));

    server.Post(R"(/v1/captures/([^/]+)/stroke)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parseBody(req, false);
                  if (!body.contains("points") || !body["points"].is_array()) {
                    fail(ErrorCode::InvalidArgument, "points must be an array of [x, y]");
                  }
                  std::vector<imaging::Point2> pts;
                  for (const auto& p : body["points"]) {
                    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                      fail(ErrorCode::InvalidArgument, "points must be an array of [x, y]");
                    }
                    pts.push_back({p[0].get<double>(), p[1].get<double>()});
                  }
                  const std::size_t total = svc.appendStroke(req.matches[1], pts);
                  sendJson(res, 200, {{"stroke_points", total}});
                }));

    server.Post(R"(/v1/captures/([^/]+)/finalize)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const ZoneSummary z = svc.finalizeZone(req.matches[1]);
                  json verts = json::array();
                  for (const auto& v : z.zone.vertices) verts.push_back({v.x, v.y});
                  sendJson(res, 200,
                           {{"zone", {{"vertices", std::move(verts)}, {"area_px", z.zone.areaPx}}},
                            {"object_count", z.objectCount},
                            {"detection_ms", z.detectionMs}});
                }));

    server.Get(R"(/v1/captures/([^/]+)/objects)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 json objs = json::array();
                 for (const auto& e : svc.listObjects(req.matches[1])) {
                   objs.push_back({{"object_id", e.objectId},
                                   {"label", e.label},
                                   {"confidence", e.confidence},
                                   {"bbox", rectJson(e.bbox)},
                                   {"thumbnail_png_base64", e.thumbnailPngBase64},
                                   {"thumbnail_width", e.thumbnailWidth},
                                   {"thumbnail_height", e.thumbnailHeight}});
                 }
                 sendJson(res, 200, {{"objects", std::move(objs)}});
               }));

    server.Post(R"(/v1/captures/([^/]+)/generate)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parseBody(req, false);
                  if (!body.contains("object_ids") || !body["object_ids"].is_array()) {
                    fail(ErrorCode::InvalidArgument, "object_ids must be an array");
                  }
                  const auto ids = body["object_ids"].get<std::vector<std::string>>();
                  std::optional<generation::GeneratorKind> kind;
                  if (body.contains("backend") && !body["backend"].is_null()) {
                    kind = generation::parseGeneratorKind(body["backend"].get<std::string>());
                  }
                  std::map<std::string, std::string> params;
                  if (body.contains("params") && body["params"].is_object()) {
                    for (const auto& [k, v] : body["params"].items()) {
                      params[k] = v.is_string() ? v.get<std::string>() : v.dump();
                    }
                  }
                  const auto jobs = svc.requestGeneration(req.matches[1], ids, kind, params);
                  sendJson(res, 202, {{"job_ids", jobs}});
                }));

    server.Get(R"(/v1/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 sendJson(res, 200, jobJson(svc.jobStatus(req.matches[1])));
               }));

    server.Get(R"(/v1/jobs/([^/]+)/asset)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto glb = svc.fetchAsset(req.matches[1]);
                 res.status = 200;
                 res.set_content(reinterpret_cast<const char*>(glb->data()), glb->size(),
                                 "model/gltf-binary");
               }));

    server.Post(R"(/v1/jobs/([^/]+)/rendered)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parseBody(req, true);
                  svc.reportRendered(req.matches[1], optionalNumber(body, "load_render_ms"));
                  res.status = 204;
                }));

    server.Get("/v1/metrics", guarded([this](const httplib::Request&, httplib::Response& res) {
                 res.status = 200;
                 res.set_content(toJson(svc.metricsReport()), "application/json");
               }));

    server.Post("/v1/metrics", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parseBody(req, false);
                  MetricsRecord r;
                  r.detectionMs = optionalNumber(body, "detection_ms");
                  r.conversionMs = optionalNumber(body, "conversion_ms");
                  r.simplifyMs = optionalNumber(body, "simplify_ms");
                  r.exportMs = optionalNumber(body, "export_ms");
                  r.loadRenderMs = optionalNumber(body, "load_render_ms");
                  r.gpuUtilPct = optionalNumber(body, "gpu_util_pct");
                  r.gpuMemGb = optionalNumber(body, "gpu_mem_gb");
                  svc.ingestMetrics(r);
                  res.status = 204;
                }));

    server.set_pre_routing_handler([this](const httplib::Request&, httplib::Response&) {
      svc.sweepExpired();
      return httplib::Server::HandlerResponse::Unhandled;
    });
  }

  static json sessionJson(const SessionView& v) {
    json out = {{"capture_id", v.sessionId},
                {"mode", toString(v.mode)},
                {"state", toString(v.state)},
                {"width", v.frameWidth},
                {"height", v.frameHeight},
                {"stroke_points", v.strokePoints},
                {"object_count", v.objectCount}};
    if (v.zone) {
      json verts = json::array();
      for (const auto& p : v.zone->vertices) verts.push_back({p.x, p.y});
      out["zone"] = {{"vertices", std::move(verts)}, {"area_px", v.zone->areaPx}};
    }
    return out;
  }
};

HttpApi::HttpApi(PipelineService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpApi::~HttpApi() { stop(); }

int HttpApi::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) fail(ErrorCode::InvalidArgument, "could not bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpApi::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    fail(ErrorCode::InvalidArgument, "could not listen on " + host + ":" + std::to_string(port));
  }
}

void HttpApi::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace clonar::server
