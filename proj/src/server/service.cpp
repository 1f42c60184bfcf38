#include "clonar/server/service.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "clonar/error.hpp"
#include "clonar/imaging/codec.hpp"
#include "clonar/meshops/assets.hpp"
#include "clonar/meshops/decimate.hpp"

namespace clonar::server {

using SteadyClock = std::chrono::steady_clock;
using imaging::BinaryMask;
using imaging::PixelRect;
using imaging::Point2;
using imaging::RasterImage;

CaptureMode parseCaptureMode(const std::string& s) {
  if (s == "zone") return CaptureMode::Zone;
  if (s == "all") return CaptureMode::All;
  fail(ErrorCode::InvalidArgument, "unknown capture mode '" + s + "'");
}

std::string toString(CaptureMode m) { return m == CaptureMode::Zone ? "zone" : "all"; }

std::string toString(SessionState s) {
  switch (s) {
    case SessionState::Open: return "open";
    case SessionState::ZoneFinal: return "zone_final";
    case SessionState::Detected: return "detected";
    case SessionState::Expired: return "expired";
  }
  return "unknown";
}

RasterImage thumbnail(const RasterImage& img, int maxSide) {
  const int longest = std::max(img.width(), img.height());
  if (maxSide <= 0 || longest <= maxSide) return img;
  const double scale = static_cast<double>(maxSide) / longest;
  const int w = std::max(1, static_cast<int>(std::lround(img.width() * scale)));
  const int h = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
  RasterImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(img.height() - 1, static_cast<int>((y + 0.5) * img.height() / h));
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(img.width() - 1, static_cast<int>((x + 0.5) * img.width() / w));
      out.at(x, y) = img.at(sx, sy);
    }
  }
  return out;
}

namespace {

double msSince(SteadyClock::time_point t0) {
  return std::chrono::duration<double, std::milli>(SteadyClock::now() - t0).count();
}

std::string newSessionId() {
  static std::atomic<std::uint64_t> counter{0};
  static const std::uint64_t salt = std::random_device{}();
  char buf[40];
  std::snprintf(buf, sizeof buf, "cap-%08llx-%06llu",
                static_cast<unsigned long long>(salt & 0xffffffffULL),
                static_cast<unsigned long long>(counter.fetch_add(1) + 1));
  return buf;
}

PixelRect polygonBounds(const lasso::LassoPolygon& zone, int width, int height) {
  double x0 = zone.vertices.front().x, x1 = x0;
  double y0 = zone.vertices.front().y, y1 = y0;
  for (const auto& p : zone.vertices) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const int ix0 = static_cast<int>(std::floor(x0));
  const int iy0 = static_cast<int>(std::floor(y0));
  const int ix1 = static_cast<int>(std::ceil(x1));
  const int iy1 = static_cast<int>(std::ceil(y1));
  return imaging::padAndClamp({ix0, iy0, ix1 - ix0 + 1, iy1 - iy0 + 1}, 0, width, height);
}

// Runs the wrapped backend on a sub-rectangle and maps its masks back into
// full-frame coordinates.
class CroppedBackend final : public detection::SegmentationBackend {
 public:
  CroppedBackend(detection::SegmentationBackend& inner, PixelRect rect)
      : inner_(inner), rect_(rect) {}

  std::vector<detection::RawDetection> detect(const RasterImage& img,
                                              std::stop_token stop) override {
    RasterImage sub = imaging::crop(img, rect_, 0);
    auto raws = inner_.detect(sub, stop);
    for (auto& raw : raws) {
      if (raw.mask.width() != sub.width() || raw.mask.height() != sub.height()) {
        fail(ErrorCode::MalformedBackendResponse, "detection mask does not match the crop size");
      }
      BinaryMask full(img.width(), img.height());
      for (int y = 0; y < sub.height(); ++y) {
        for (int x = 0; x < sub.width(); ++x) {
          if (raw.mask.get(x, y)) full.set(rect_.x + x, rect_.y + y);
        }
      }
      raw.mask = std::move(full);
    }
    return raws;
  }

  std::string name() const override { return inner_.name(); }

 private:
  detection::SegmentationBackend& inner_;
  PixelRect rect_;
};

}  // namespace

struct PipelineService::Session {
  std::mutex mu;
  std::string id;
  CaptureMode mode = CaptureMode::Zone;
  SessionState state = SessionState::Open;
  RasterImage frame;
  lasso::Stroke stroke;
  std::optional<lasso::LassoPolygon> zone;
  std::vector<detection::DetectedObject> objects;
  SteadyClock::time_point lastTouched;
  SteadyClock::time_point expiredAt;
};

struct PipelineService::Asset {
  std::shared_ptr<const std::vector<std::uint8_t>> glb;
  std::optional<SteadyClock::time_point> firstFetch;
  bool renderReported = false;
};

PipelineService::PipelineService(ServerConfig cfg) : PipelineService(std::move(cfg), Backends{}) {}

PipelineService::PipelineService(ServerConfig cfg, Backends backends, Clock clock)
    : cfg_(std::move(cfg)), clock_(std::move(clock)) {
  if (!clock_) clock_ = [] { return SteadyClock::now(); };
  detector_ = backends.detector ? backends.detector
                                : std::shared_ptr<detection::SegmentationBackend>(
                                      detection::makeBackend(cfg_.detector));
  auto gens = std::move(backends.generators);
  if (!gens.count(generation::GeneratorKind::Stub)) {
    gens[generation::GeneratorKind::Stub] = std::make_shared<generation::StubGenerator>();
  }
  if (!gens.count(generation::GeneratorKind::External) && !cfg_.generator.externalUrl.empty()) {
    gens[generation::GeneratorKind::External] = std::make_shared<generation::ExternalGenerator>(
        cfg_.generator.externalUrl, cfg_.generator.timeoutMs, cfg_.generator.pollIntervalMs);
  }
  generation::JobQueue::Options opts;
  opts.workers = cfg_.generator.workers;
  opts.capacity = cfg_.generator.queueCapacity;
  jobs_ = std::make_unique<generation::JobQueue>(
      std::move(gens), opts,
      [this](const std::string& id, Mesh& m, generation::JobTimings& t) { postProcess(id, m, t); });
}

PipelineService::~PipelineService() { jobs_->shutdown(); }

void PipelineService::sweepExpired() {
  const auto now = clock_();
  std::lock_guard lk(sessionsMu_);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    Session& s = *it->second;
    std::unique_lock sl(s.mu, std::try_to_lock);
    if (!sl.owns_lock()) {  // in use, so not idle
      ++it;
      continue;
    }
    if (s.state != SessionState::Expired && now - s.lastTouched >= cfg_.sessionTtl) {
      s.state = SessionState::Expired;
      s.expiredAt = now;
      s.frame = {};
      s.objects.clear();
    }
    if (s.state == SessionState::Expired && now - s.expiredAt >= cfg_.sessionTtl) {
      sl.unlock();
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::shared_ptr<PipelineService::Session> PipelineService::find(const std::string& sessionId) {
  sweepExpired();
  std::lock_guard lk(sessionsMu_);
  auto it = sessions_.find(sessionId);
  if (it == sessions_.end()) fail(ErrorCode::UnknownSession, "unknown capture " + sessionId);
  return it->second;
}

namespace {

void requireLive(SessionState s) {
  if (s == SessionState::Expired) fail(ErrorCode::SessionExpired, "capture has expired");
}

}  // namespace

double PipelineService::runDetection(Session& s, const std::optional<lasso::LassoPolygon>& zone,
                                     SteadyClock::time_point t0) {
  std::vector<detection::DetectedObject> objs;
  if (zone) {
    const PixelRect rect = imaging::padAndClamp(
        polygonBounds(*zone, s.frame.width(), s.frame.height()), cfg_.detector.cropPaddingPx,
        s.frame.width(), s.frame.height());
    if (rect.w == 0) fail(ErrorCode::ZoneTooSmall, "zone lies outside the frame");
    CroppedBackend cropped(*detector_, rect);
    objs = detection::segment(s.frame, zone, cfg_.detector, cropped);
  } else {
    objs = detection::segment(s.frame, std::nullopt, cfg_.detector, *detector_);
  }
  MetricsRecord rec;
  rec.detectionMs = msSince(t0);
  metrics_.ingest(rec);
  s.objects = std::move(objs);
  s.state = SessionState::Detected;
  return *rec.detectionMs;
}

std::string PipelineService::createCapture(std::span<const std::uint8_t> framePng,
                                           CaptureMode mode) {
  sweepExpired();
  auto s = std::make_shared<Session>();
  s->frame = imaging::decodePng(framePng);
  s->id = newSessionId();
  s->mode = mode;
  s->lastTouched = clock_();
  if (mode == CaptureMode::All) runDetection(*s, std::nullopt, SteadyClock::now());

  std::lock_guard lk(sessionsMu_);
  std::size_t live = 0;
  for (const auto& [id, other] : sessions_) {
    std::lock_guard sl(other->mu);
    if (other->state != SessionState::Expired) ++live;
  }
  if (live >= cfg_.maxSessions) {
    fail(ErrorCode::SessionLimitReached,
         "session limit reached (" + std::to_string(cfg_.maxSessions) + ")");
  }
  sessions_.emplace(s->id, s);
  return s->id;
}

SessionView PipelineService::session(const std::string& sessionId) {
  auto s = find(sessionId);
  std::lock_guard lk(s->mu);
  requireLive(s->state);
  SessionView v;
  v.sessionId = s->id;
  v.mode = s->mode;
  v.state = s->state;
  v.frameWidth = s->frame.width();
  v.frameHeight = s->frame.height();
  v.strokePoints = s->stroke.points.size();
  v.zone = s->zone;
  v.objectCount = s->objects.size();
  return v;
}

std::size_t PipelineService::appendStroke(const std::string& sessionId,
                                          std::span<const Point2> points) {
  auto s = find(sessionId);
  std::lock_guard lk(s->mu);
  requireLive(s->state);
  if (s->mode != CaptureMode::Zone || s->state != SessionState::Open) {
    fail(ErrorCode::IllegalTransition,
         "strokes are only accepted on an open zone capture (state " + toString(s->state) + ")");
  }
  const auto now = clock_();
  const auto nowMs = std::chrono::duration_cast<std::chrono::milliseconds>(
                         now.time_since_epoch()).count();
  s->stroke.append(points, nowMs);
  s->lastTouched = now;
  return s->stroke.points.size();
}

ZoneSummary PipelineService::finalizeZone(const std::string& sessionId) {
  auto s = find(sessionId);
  std::lock_guard lk(s->mu);
  requireLive(s->state);
  if (s->mode != CaptureMode::Zone || s->state == SessionState::Detected) {
    fail(ErrorCode::IllegalTransition, "capture cannot be finalized in state " + toString(s->state));
  }
  s->lastTouched = clock_();
  const auto t0 = SteadyClock::now();
  if (s->state == SessionState::Open) {
    s->zone = s->stroke.points.empty()
                  ? lasso::zoneFromStrokeColor(s->frame, imaging::ColorThresholds::strokeRed(),
                                               cfg_.minStrokeContourArea, cfg_.lasso)
                  : lasso::closeStroke(s->stroke, cfg_.lasso);
    s->state = SessionState::ZoneFinal;
  }
  const double ms = runDetection(*s, s->zone, t0);
  ZoneSummary out;
  out.zone = *s->zone;
  out.objectCount = s->objects.size();
  out.detectionMs = ms;
  return out;
}

std::vector<MenuEntry> PipelineService::listObjects(const std::string& sessionId) {
  auto s = find(sessionId);
  std::lock_guard lk(s->mu);
  requireLive(s->state);
  if (s->state != SessionState::Detected) {
    fail(ErrorCode::NotDetectedYet, "detection has not run for this capture");
  }
  s->lastTouched = clock_();
  std::vector<MenuEntry> out;
  out.reserve(s->objects.size());
  for (const auto& o : s->objects) {
    MenuEntry e;
    e.objectId = o.id;
    e.label = o.label;
    e.confidence = o.confidence;
    e.bbox = o.bbox;
    const RasterImage thumb = thumbnail(o.crop, cfg_.thumbnailMaxSide);
    e.thumbnailWidth = thumb.width();
    e.thumbnailHeight = thumb.height();
    e.thumbnailPngBase64 = imaging::base64Encode(imaging::encodePng(thumb));
    out.push_back(std::move(e));
  }
  return out;
}

RasterImage PipelineService::objectCrop(const std::string& sessionId, const std::string& objectId) {
  auto s = find(sessionId);
  std::lock_guard lk(s->mu);
  requireLive(s->state);
  if (s->state != SessionState::Detected) {
    fail(ErrorCode::NotDetectedYet, "detection has not run for this capture");
  }
  for (const auto& o : s->objects) {
    if (o.id == objectId) return o.crop;
  }
  fail(ErrorCode::UnknownObject, "unknown object " + objectId);
}

std::vector<std::string> PipelineService::requestGeneration(
    const std::string& sessionId, const std::vector<std::string>& objectIds,
    std::optional<generation::GeneratorKind> backend,
    const std::map<std::string, std::string>& params) {
  if (objectIds.empty()) fail(ErrorCode::InvalidArgument, "no objects selected");
  auto s = find(sessionId);
  std::vector<generation::GenerationRequest> reqs;
  {
    std::lock_guard lk(s->mu);
    requireLive(s->state);
    if (s->state != SessionState::Detected) {
      fail(ErrorCode::NotDetectedYet, "detection has not run for this capture");
    }
    s->lastTouched = clock_();
    for (const auto& id : objectIds) {
      auto it = std::find_if(s->objects.begin(), s->objects.end(),
                             [&](const auto& o) { return o.id == id; });
      if (it == s->objects.end()) fail(ErrorCode::UnknownObject, "unknown object " + id);
      generation::GenerationRequest r;
      r.payload = detection::encodePayload(*it);
      r.params = params;
      reqs.push_back(std::move(r));
    }
  }
  const auto kind = backend.value_or(cfg_.generator.defaultBackend);
  std::vector<std::string> ids;
  for (auto& r : reqs) ids.push_back(jobs_->submit(std::move(r), kind).jobId);
  return ids;
}

void PipelineService::postProcess(const std::string& jobId, Mesh& mesh,
                                  generation::JobTimings& t) {
  auto t0 = SteadyClock::now();
  if (mesh.vertices.size() > cfg_.targetVertices) {
    meshops::DecimationParams p;
    p.targetVertices = cfg_.targetVertices;
    mesh = meshops::decimate(mesh, p);
    if (mesh.vertices.size() > cfg_.targetVertices) {
      fail(ErrorCode::TargetTooSmall, "mesh could not be reduced to " +
                                          std::to_string(cfg_.targetVertices) + " vertices");
    }
  }
  t.simplifyMs = msSince(t0);

  t0 = SteadyClock::now();
  auto glb = std::make_shared<const std::vector<std::uint8_t>>(meshops::exportGltf(mesh));
  if (cfg_.assetDir) {
    std::filesystem::create_directories(*cfg_.assetDir);
    std::ofstream f(std::filesystem::path(*cfg_.assetDir) / (jobId + ".glb"), std::ios::binary);
    f.write(reinterpret_cast<const char*>(glb->data()), static_cast<std::streamsize>(glb->size()));
    if (!f) fail(ErrorCode::EncodingFailure, "could not write asset for " + jobId);
  }
  t.exportMs = msSince(t0);

  {
    std::lock_guard lk(assetsMu_);
    auto a = std::make_shared<Asset>();
    a->glb = std::move(glb);
    assets_[jobId] = std::move(a);
  }
  MetricsRecord rec;
  rec.conversionMs = t.conversionMs;
  rec.simplifyMs = t.simplifyMs;
  rec.exportMs = t.exportMs;
  metrics_.ingest(rec);
}

JobView PipelineService::jobStatus(const std::string& jobId) {
  JobView v;
  v.job = jobs_->status(jobId);
  if (v.job.state == generation::JobState::Succeeded) {
    std::lock_guard lk(assetsMu_);
    if (auto it = assets_.find(jobId); it != assets_.end()) v.assetBytes = it->second->glb->size();
  }
  return v;
}

JobView PipelineService::waitForJob(const std::string& jobId, std::chrono::milliseconds timeout) {
  jobs_->wait(jobId, timeout);
  return jobStatus(jobId);
}

std::shared_ptr<const std::vector<std::uint8_t>> PipelineService::fetchAsset(
    const std::string& jobId) {
  const auto job = jobs_->status(jobId);
  if (job.state != generation::JobState::Succeeded) {
    fail(ErrorCode::NotReady, "job " + jobId + " is " + generation::toString(job.state));
  }
  std::lock_guard lk(assetsMu_);
  auto it = assets_.find(jobId);
  if (it == assets_.end()) fail(ErrorCode::NotReady, "asset for " + jobId + " is not stored");
  if (!it->second->firstFetch) it->second->firstFetch = clock_();
  return it->second->glb;
}

void PipelineService::reportRendered(const std::string& jobId, std::optional<double> loadRenderMs) {
  const auto job = jobs_->status(jobId);
  if (job.state != generation::JobState::Succeeded) {
    fail(ErrorCode::NotReady, "job " + jobId + " is " + generation::toString(job.state));
  }
  double ms = 0.0;
  {
    std::lock_guard lk(assetsMu_);
    auto it = assets_.find(jobId);
    if (it == assets_.end()) fail(ErrorCode::NotReady, "asset for " + jobId + " is not stored");
    Asset& a = *it->second;
    if (a.renderReported) return;
    if (loadRenderMs) {
      ms = *loadRenderMs;
    } else {
      if (!a.firstFetch) fail(ErrorCode::NotReady, "asset has not been fetched yet");
      ms = std::chrono::duration<double, std::milli>(clock_() - *a.firstFetch).count();
    }
    if (!std::isfinite(ms) || ms < 0) fail(ErrorCode::InvalidArgument, "invalid load time");
    a.renderReported = true;
  }
  MetricsRecord rec;
  rec.loadRenderMs = ms;
  metrics_.ingest(rec);
}

}  // namespace clonar::server
