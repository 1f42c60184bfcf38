#include "clonar/generation/job_queue.hpp"

#include <atomic>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "clonar/error.hpp"

namespace clonar::generation {

std::string toString(JobState s) {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Succeeded: return "succeeded";
    case JobState::Failed: return "failed";
  }
  return "unknown";
}

struct JobQueue::Record {
  GenerationJob view;
  GenerationRequest request;
};

namespace {

std::string newJobId() {
  static std::atomic<std::uint64_t> counter{0};
  static const std::uint64_t salt = std::random_device{}();
  char buf[40];
  std::snprintf(buf, sizeof buf, "job-%08llx-%06llu",
                static_cast<unsigned long long>(salt & 0xffffffffULL),
                static_cast<unsigned long long>(counter.fetch_add(1) + 1));
  return buf;
}

bool isTerminal(JobState s) { return s == JobState::Succeeded || s == JobState::Failed; }

}  // namespace

JobQueue::JobQueue(std::map<GeneratorKind, std::shared_ptr<GeneratorBackend>> backends,
                   Options opts, PostProcess post)
    : backends_(std::move(backends)), opts_(opts), post_(std::move(post)) {
  if (opts_.workers <= 0) fail(ErrorCode::InvalidArgument, "worker count must be positive");
  for (int i = 0; i < opts_.workers; ++i) {
    workers_.emplace_back([this](std::stop_token st) { workerLoop(st); });
  }
}

JobQueue::~JobQueue() { shutdown(); }

void JobQueue::transition(Record& rec, JobState next) {
  const JobState cur = rec.view.state;
  const bool ok = (cur == JobState::Queued && (next == JobState::Running || next == JobState::Failed)) ||
                  (cur == JobState::Running && isTerminal(next));
  if (!ok) {
    throw std::logic_error("illegal job transition " + toString(cur) + " -> " + toString(next));
  }
  rec.view.state = next;
}

GenerationJob JobQueue::submit(GenerationRequest req, GeneratorKind kind) {
  auto rec = std::make_shared<Record>();
  rec->view.jobId = newJobId();
  rec->view.label = req.payload.label;
  rec->view.backend = kind;
  rec->request = std::move(req);
  {
    std::lock_guard lk(mu_);
    if (stopping_) fail(ErrorCode::QueueFull, "job queue is shut down");
    if (queue_.size() >= opts_.capacity) {
      fail(ErrorCode::QueueFull, "generation queue is full (" + std::to_string(opts_.capacity) + ")");
    }
    queue_.push_back(rec);
    jobs_.emplace(rec->view.jobId, rec);
  }
  wake_.notify_one();
  std::lock_guard lk(mu_);
  return rec->view;
}

GenerationJob JobQueue::status(const std::string& jobId) const {
  std::lock_guard lk(mu_);
  const auto it = jobs_.find(jobId);
  if (it == jobs_.end()) fail(ErrorCode::UnknownJob, "unknown job '" + jobId + "'");
  return it->second->view;
}

GenerationJob JobQueue::wait(const std::string& jobId, std::chrono::milliseconds timeout) const {
  std::unique_lock lk(mu_);
  const auto it = jobs_.find(jobId);
  if (it == jobs_.end()) fail(ErrorCode::UnknownJob, "unknown job '" + jobId + "'");
  const auto rec = it->second;
  changed_.wait_for(lk, timeout, [&] { return isTerminal(rec->view.state); });
  return rec->view;
}

std::size_t JobQueue::pending() const {
  std::lock_guard lk(mu_);
  return queue_.size();
}

void JobQueue::workerLoop(std::stop_token stop) {
  for (;;) {
    std::shared_ptr<Record> rec;
    {
      std::unique_lock lk(mu_);
      if (!wake_.wait(lk, stop, [&] { return !queue_.empty(); })) return;
      rec = queue_.front();
      queue_.pop_front();
      transition(*rec, JobState::Running);
    }
    changed_.notify_all();
    run(*rec, stop);
    changed_.notify_all();
  }
}

void JobQueue::run(Record& rec, std::stop_token stop) {
  try {
    const auto it = backends_.find(rec.view.backend);
    if (it == backends_.end() || !it->second) {
      fail(ErrorCode::BackendUnavailable,
           "no " + toString(rec.view.backend) + " generator backend configured");
    }
    JobTimings timings;
    const auto t0 = std::chrono::steady_clock::now();
    Mesh mesh = it->second->generate(rec.request, stop);
    timings.conversionMs =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    mesh.checkStructure();
    if (post_) post_(rec.view.jobId, mesh, timings);

    auto result = std::make_shared<const Mesh>(std::move(mesh));
    std::lock_guard lk(mu_);
    rec.view.timings = timings;
    rec.view.result = std::move(result);
    transition(rec, JobState::Succeeded);
  } catch (const std::exception& e) {
    std::lock_guard lk(mu_);
    rec.view.error = e.what();
    if (rec.view.error->empty()) rec.view.error = "generation failed";
    transition(rec, JobState::Failed);
  }
}

void JobQueue::shutdown() {
  {
    std::lock_guard lk(mu_);
    if (stopping_) return;
    stopping_ = true;
  }
  for (auto& w : workers_) w.request_stop();
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  {
    std::lock_guard lk(mu_);
    for (auto& rec : queue_) {
      rec->view.error = "shutdown";
      transition(*rec, JobState::Failed);
    }
    queue_.clear();
  }
  changed_.notify_all();
}

}  // namespace clonar::generation
