#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clonar/detection/detection.hpp"
#include "clonar/generation/job_queue.hpp"
#include "clonar/lasso/lasso.hpp"
#include "clonar/server/config.hpp"
#include "clonar/server/metrics.hpp"

namespace clonar::server {

enum class CaptureMode { Zone, All };
enum class SessionState { Open, ZoneFinal, Detected, Expired };

CaptureMode parseCaptureMode(const std::string& s);
std::string toString(CaptureMode m);
std::string toString(SessionState s);

struct SessionView {
  std::string sessionId;
  CaptureMode mode = CaptureMode::Zone;
  SessionState state = SessionState::Open;
  int frameWidth = 0;
  int frameHeight = 0;
  std::size_t strokePoints = 0;
  std::optional<lasso::LassoPolygon> zone;
  std::size_t objectCount = 0;
};

struct ZoneSummary {
  lasso::LassoPolygon zone;
  std::size_t objectCount = 0;
  double detectionMs = 0.0;
};

struct MenuEntry {
  std::string objectId;
  std::string label;
  double confidence = 0.0;
  imaging::PixelRect bbox;
  std::string thumbnailPngBase64;
  int thumbnailWidth = 0;
  int thumbnailHeight = 0;
};

struct JobView {
  generation::GenerationJob job;
  std::optional<std::size_t> assetBytes;
};

/// Nearest-neighbour downscale so the longer side is at most maxSide;
/// smaller images are returned unchanged.
imaging::RasterImage thumbnail(const imaging::RasterImage& img, int maxSide);

/// The capture-to-asset workflow behind the HTTP API. Sessions are mutated
/// under a per-session lock; generation runs on the job queue's workers.
class PipelineService {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  struct Backends {
    std::shared_ptr<detection::SegmentationBackend> detector;  // null: from config
    std::map<generation::GeneratorKind, std::shared_ptr<generation::GeneratorBackend>> generators;
  };

  explicit PipelineService(ServerConfig cfg);
  PipelineService(ServerConfig cfg, Backends backends, Clock clock = {});
  ~PipelineService();

  PipelineService(const PipelineService&) = delete;
  PipelineService& operator=(const PipelineService&) = delete;

  const ServerConfig& config() const { return cfg_; }

  /// Throws MalformedImage, SessionLimitReached; in All mode also the
  /// detection errors.
  std::string createCapture(std::span<const std::uint8_t> framePng, CaptureMode mode);

  SessionView session(const std::string& sessionId);

  /// Returns the accumulated point count. Throws UnknownSession,
  /// SessionExpired, IllegalTransition.
  std::size_t appendStroke(const std::string& sessionId, std::span<const imaging::Point2> points);

  /// Closes the stroke (or, with no stroke points, traces the stroke colour
  /// in the frame), crops to the zone and runs detection.
  ZoneSummary finalizeZone(const std::string& sessionId);

  /// Throws NotDetectedYet before detection.
  std::vector<MenuEntry> listObjects(const std::string& sessionId);

  /// Full-resolution transparent crop of one detected object.
  /// Throws NotDetectedYet, UnknownObject.
  imaging::RasterImage objectCrop(const std::string& sessionId, const std::string& objectId);

  /// One job per object. Throws UnknownObject, QueueFull, NotDetectedYet.
  std::vector<std::string> requestGeneration(
      const std::string& sessionId, const std::vector<std::string>& objectIds,
      std::optional<generation::GeneratorKind> backend = std::nullopt,
      const std::map<std::string, std::string>& params = {});

  JobView jobStatus(const std::string& jobId);

  /// Blocks until the job is terminal or timeout; for CLI and tests.
  JobView waitForJob(const std::string& jobId, std::chrono::milliseconds timeout);

  /// .glb body. Throws UnknownJob, NotReady.
  std::shared_ptr<const std::vector<std::uint8_t>> fetchAsset(const std::string& jobId);

  /// Client render-ready report. Without an explicit value the time since the
  /// first asset fetch is used. Only the first report per job is recorded.
  void reportRendered(const std::string& jobId, std::optional<double> loadRenderMs);

  void ingestMetrics(const MetricsRecord& r) { metrics_.ingest(r); }
  MetricsReport metricsReport() const { return metrics_.report(); }

  /// Expires idle sessions and drops old tombstones. Called on every request.
  void sweepExpired();

 private:
  struct Session;
  struct Asset;

  std::shared_ptr<Session> find(const std::string& sessionId);
  /// Returns the detection time in ms, measured from t0.
  double runDetection(Session& s, const std::optional<lasso::LassoPolygon>& zone,
                      std::chrono::steady_clock::time_point t0);
  void postProcess(const std::string& jobId, Mesh& mesh, generation::JobTimings& t);

  ServerConfig cfg_;
  Clock clock_;
  std::shared_ptr<detection::SegmentationBackend> detector_;
  MetricsLog metrics_;

  std::mutex sessionsMu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;

  std::mutex assetsMu_;
  std::map<std::string, std::shared_ptr<Asset>> assets_;

  std::unique_ptr<generation::JobQueue> jobs_;  // last: workers stop first
};

}  // namespace clonar::server
