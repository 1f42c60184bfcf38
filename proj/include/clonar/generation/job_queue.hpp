#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "clonar/generation/generators.hpp"

namespace clonar::generation {

enum class JobState { Queued, Running, Succeeded, Failed };

std::string toString(JobState s);

struct JobTimings {
  std::optional<double> conversionMs;
  std::optional<double> simplifyMs;
  std::optional<double> exportMs;
};

/// Snapshot of a job. result is set iff state == Succeeded.
struct GenerationJob {
  std::string jobId;
  std::string label;
  GeneratorKind backend = GeneratorKind::Stub;
  JobState state = JobState::Queued;
  std::shared_ptr<const Mesh> result;
  std::optional<std::string> error;
  JobTimings timings;
};

/// Bounded queue drained by a fixed worker pool. Callers poll status().
class JobQueue {
 public:
  /// Runs on the worker after a successful generation and before the job is
  /// published as succeeded; may replace the mesh and fill in timings.
  /// Throwing fails the job.
  using PostProcess = std::function<void(const std::string& jobId, Mesh& mesh, JobTimings& t)>;

  struct Options {
    int workers = 2;
    std::size_t capacity = 64;  // queued (not yet running) jobs
  };

  JobQueue(std::map<GeneratorKind, std::shared_ptr<GeneratorBackend>> backends, Options opts,
           PostProcess post = {});
  ~JobQueue();

  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  /// Throws QueueFull. A missing backend surfaces as a failed job.
  GenerationJob submit(GenerationRequest req, GeneratorKind kind);

  /// Throws UnknownJob.
  GenerationJob status(const std::string& jobId) const;

  /// Blocks until the job is terminal or the timeout elapses; returns the
  /// latest snapshot.
  GenerationJob wait(const std::string& jobId, std::chrono::milliseconds timeout) const;

  std::size_t pending() const;

  /// Stops workers; queued jobs are failed with "shutdown".
  void shutdown();

 private:
  struct Record;

  void workerLoop(std::stop_token stop);
  void run(Record& rec, std::stop_token stop);
  static void transition(Record& rec, JobState next);

  std::map<GeneratorKind, std::shared_ptr<GeneratorBackend>> backends_;
  Options opts_;
  PostProcess post_;

  mutable std::mutex mu_;
  mutable std::condition_variable changed_;
  std::condition_variable_any wake_;
  std::deque<std::shared_ptr<Record>> queue_;
  std::map<std::string, std::shared_ptr<Record>> jobs_;
  std::vector<std::jthread> workers_;
  bool stopping_ = false;
};

}  // namespace clonar::generation
