#include <doctest.h>

#include <atomic>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "clonar/detection/detection.hpp"
#include "clonar/generation/extrude.hpp"
#include "clonar/generation/generators.hpp"
#include "clonar/generation/job_queue.hpp"
#include "clonar/imaging/codec.hpp"
#include "clonar/meshops/assets.hpp"
#include "fixtures.hpp"
#include "mock_http.hpp"

using namespace clonar;
using namespace clonar::generation;
using clonar::imaging::BinaryMask;
using clonar::imaging::RasterImage;
using fixtures::errorOf;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

BinaryMask rectMask(int w, int h, int x0, int y0, int rw, int rh) {
  BinaryMask m(w, h);
  for (int y = y0; y < y0 + rh; ++y) {
    for (int x = x0; x < x0 + rw; ++x) m.set(x, y);
  }
  return m;
}

detection::ObjectPayload payloadFromMask(const BinaryMask& m, const std::string& label = "thing") {
  RasterImage img(m.width(), m.height(), {0, 0, 0, 0});
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.get(x, y)) img.at(x, y) = {0, 200, 0, 255};
    }
  }
  return {label, imaging::base64Encode(imaging::encodePng(img)), m.width(), m.height()};
}

// Divergence-theorem volume written out independently of validateMesh.
double oracleVolume(const Mesh& m) {
  double v = 0;
  for (const auto& f : m.faces) {
    const auto &a = m.vertices[f[0]], &b = m.vertices[f[1]], &c = m.vertices[f[2]];
    v += a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) + a.z * (b.x * c.y - b.y * c.x);
  }
  return v / 6.0;
}

}  // namespace

TEST_CASE("validateMesh on a unit cube and an open cube") {
  const auto cube = fixtures::box();
  const auto r = validateMesh(cube);
  CHECK(r.isManifoldEdge);
  CHECK(r.isClosed());
  CHECK(r.degenerateFaces == 0);
  CHECK(r.volume == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(oracleVolume(cube) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.boundsMin == Vec3{0, 0, 0});
  CHECK(r.boundsMax == Vec3{1, 1, 1});

  auto open = cube;
  open.faces.resize(10);
  const auto o = validateMesh(open);
  CHECK(o.isManifoldEdge);
  CHECK_FALSE(o.isClosed());
  CHECK(o.boundaryEdges == 4);
  CHECK(std::isfinite(o.volume));

  auto broken = cube;
  broken.faces.push_back({0, 0, 1});
  CHECK(errorOf([&] { validateMesh(broken); }) == "InvalidMesh");
  broken.faces.back() = {0, 1, 99};
  CHECK(errorOf([&] { validateMesh(broken); }) == "InvalidMesh");
}

TEST_CASE("stubExtrude square is a cuboid") {
  const auto mask = rectMask(40, 30, 5, 5, 20, 10);
  ExtrudeOptions opts;
  opts.depth = DepthPolicy::fixed(0.05);
  const auto m = stubExtrude(mask, opts);
  CHECK(m.vertexCount() == 8);
  CHECK(m.faceCount() == 12);
  const auto r = validateMesh(m);
  CHECK(r.isClosed());
  CHECK(r.degenerateFaces == 0);
  const double expected = (20 * 0.001) * (10 * 0.001) * 0.05;
  CHECK(std::abs(r.volume - expected) <= 1e-9);
  CHECK(r.boundsMax.x - r.boundsMin.x == doctest::Approx(0.020));
  CHECK(r.boundsMax.y - r.boundsMin.y == doctest::Approx(0.010));
  CHECK(r.boundsMax.z - r.boundsMin.z == doctest::Approx(0.05));
}

TEST_CASE("stubExtrude L shape") {
  BinaryMask m(30, 30);
  for (int y = 2; y < 22; ++y) {
    for (int x = 2; x < 22; ++x) m.set(x, y, x < 10 || y >= 14);
  }
  const auto mesh = stubExtrude(m, {DepthPolicy::fixed(0.01), 0.001, 1.5});
  CHECK(mesh.vertexCount() == 12);
  CHECK(mesh.faceCount() == 20);
  const auto r = validateMesh(mesh);
  CHECK(r.isClosed());
  CHECK(r.degenerateFaces == 0);
  CHECK(r.volume == doctest::Approx(m.count() * 1e-6 * 0.01).epsilon(1e-9));
}

TEST_CASE("stubExtrude default depth and errors") {
  const auto mask = rectMask(50, 50, 0, 0, 16, 16);
  const auto mesh = stubExtrude(mask);
  const double area = 256 * 1e-6;
  const auto r = validateMesh(mesh);
  CHECK(r.boundsMax.z - r.boundsMin.z == doctest::Approx(0.4 * std::sqrt(area)));
  CHECK(errorOf([] { stubExtrude(BinaryMask(10, 10)); }) == "EmptyMask");
}

TEST_CASE("stubExtrude volume tracks the silhouette area for convex shapes") {
  for (int r = 8; r <= 80; r += 6) {
    const int size = 2 * r + 10;
    RasterImage img(size, size, fixtures::kWhite);
    fixtures::fillDisc(img, size / 2.0, size / 2.0, r, fixtures::kGreen);
    BinaryMask disc(size, size);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) disc.set(x, y, img.at(x, y) == fixtures::kGreen);
    }
    const double depth = 0.02;
    const auto mesh = stubExtrude(disc, {DepthPolicy::fixed(depth), 0.001, 1.5});
    const auto rep = validateMesh(mesh);
    REQUIRE(rep.isClosed());
    REQUIRE(rep.degenerateFaces == 0);
    const double expected = disc.count() * 1e-6 * depth;
    CHECK(std::abs(rep.volume - expected) <= 0.05 * expected);
  }
}

TEST_CASE("stubExtrude output is always closed on random blobs") {
  std::mt19937 rng(53);
  std::uniform_real_distribution<double> c(10, 50), rad(3, 12);
  for (int t = 0; t < 60; ++t) {
    RasterImage img(60, 60, fixtures::kWhite);
    for (int k = 0; k < 4; ++k) fixtures::fillDisc(img, c(rng), c(rng), rad(rng), fixtures::kGreen);
    BinaryMask m(60, 60);
    for (int y = 0; y < 60; ++y) {
      for (int x = 0; x < 60; ++x) m.set(x, y, img.at(x, y) == fixtures::kGreen);
    }
    const auto mesh = stubExtrude(m);
    const auto rep = validateMesh(mesh);
    REQUIRE(rep.isClosed());
    REQUIRE(rep.degenerateFaces == 0);
    CHECK(rep.volume > 0);
    CHECK(stubExtrude(m) == mesh);
  }
}

TEST_CASE("triangulate and simplify helpers") {
  const std::vector<imaging::Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(triangulate(sq).size() == 2);
  CHECK(isSimplePolygon(sq));
  const std::vector<imaging::Point2> bow{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK_FALSE(isSimplePolygon(bow));
  std::vector<imaging::Point2> wobbly;
  for (int i = 0; i <= 10; ++i) wobbly.push_back({double(i), (i % 2) * 0.1});
  wobbly.push_back({10, 10});
  wobbly.push_back({0, 10});
  CHECK(simplifyClosed(wobbly, 0.5).size() == 4);
}

TEST_CASE("stub generator is deterministic") {
  const auto payload = payloadFromMask(rectMask(30, 20, 3, 4, 12, 9));
  StubGenerator gen;
  const auto a = gen.generate({payload, {}, {}}, {});
  const auto b = gen.generate({payload, {}, {}}, {});
  CHECK(a == b);
  CHECK(meshops::exportGltf(a) == meshops::exportGltf(b));
  CHECK(a.vertexCount() == 8);
}

TEST_CASE("job queue runs stub jobs") {
  std::map<GeneratorKind, std::shared_ptr<GeneratorBackend>> backends{
      {GeneratorKind::Stub, std::make_shared<StubGenerator>()}};
  JobQueue q(backends, {2, 16});
  const auto payload = payloadFromMask(rectMask(30, 20, 3, 4, 12, 9));
  const auto j1 = q.submit({payload, {}, {}}, GeneratorKind::Stub);
  const auto j2 = q.submit({payload, {}, {}}, GeneratorKind::Stub);
  CHECK(j1.jobId != j2.jobId);
  const auto d1 = q.wait(j1.jobId, 5s);
  REQUIRE((d1.state == JobState::Succeeded));
  REQUIRE(d1.result);
  CHECK(d1.result->vertexCount() == 8);
  CHECK(d1.timings.conversionMs.has_value());
  CHECK((q.wait(j2.jobId, 5s).state == JobState::Succeeded));
  CHECK(errorOf([&] { q.status("job-nope"); }) == "UnknownJob");

  const auto missing = q.submit({payload, {}, {}}, GeneratorKind::External);
  const auto dm = q.wait(missing.jobId, 5s);
  CHECK((dm.state == JobState::Failed));
  REQUIRE(dm.error);
  CHECK_FALSE(dm.error->empty());
}

TEST_CASE("job state never regresses") {
  class Slow final : public GeneratorBackend {
   public:
    Mesh generate(const GenerationRequest&, std::stop_token) override {
      std::this_thread::sleep_for(30ms);
      return fixtures::box();
    }
    std::string name() const override { return "slow"; }
  };
  JobQueue q({{GeneratorKind::Stub, std::make_shared<Slow>()}}, {1, 16});
  const auto payload = payloadFromMask(rectMask(8, 8, 1, 1, 4, 4));
  std::vector<std::string> ids;
  for (int i = 0; i < 5; ++i) ids.push_back(q.submit({payload, {}, {}}, GeneratorKind::Stub).jobId);
  std::map<std::string, int> last;
  auto rank = [](JobState s) { return s == JobState::Queued ? 0 : s == JobState::Running ? 1 : 2; };
  const auto deadline = std::chrono::steady_clock::now() + 5s;
  bool done = false;
  while (!done && std::chrono::steady_clock::now() < deadline) {
    done = true;
    for (const auto& id : ids) {
      const auto s = q.status(id);
      const int r = rank(s.state);
      REQUIRE(r >= last[id]);
      if (last[id] == 2) CHECK((s.state == JobState::Succeeded));
      last[id] = r;
      done = done && r == 2;
    }
    std::this_thread::sleep_for(2ms);
  }
  CHECK(done);
}

TEST_CASE("job queue capacity and post-processing failures") {
  class Blocking final : public GeneratorBackend {
   public:
    std::atomic<bool> release{false};
    Mesh generate(const GenerationRequest&, std::stop_token stop) override {
      while (!release && !stop.stop_requested()) std::this_thread::sleep_for(1ms);
      return fixtures::box();
    }
    std::string name() const override { return "blocking"; }
  };
  auto blocking = std::make_shared<Blocking>();
  JobQueue q({{GeneratorKind::Stub, blocking}}, {1, 2},
             [](const std::string&, Mesh& m, JobTimings&) {
               if (m.vertexCount() > 0) throw Error(ErrorCode::TargetTooSmall, "cannot reach target");
             });
  const auto payload = payloadFromMask(rectMask(8, 8, 1, 1, 4, 4));
  const auto first = q.submit({payload, {}, {}}, GeneratorKind::Stub);
  // Wait until the worker holds the first job so the queue is empty.
  for (int i = 0; i < 1000 && q.status(first.jobId).state == JobState::Queued; ++i) {
    std::this_thread::sleep_for(1ms);
  }
  q.submit({payload, {}, {}}, GeneratorKind::Stub);
  q.submit({payload, {}, {}}, GeneratorKind::Stub);
  CHECK(errorOf([&] { q.submit({payload, {}, {}}, GeneratorKind::Stub); }) == "QueueFull");
  blocking->release = true;
  const auto done = q.wait(first.jobId, 5s);
  CHECK((done.state == JobState::Failed));
  CHECK(done.error.value_or("").find("cannot reach target") != std::string::npos);
}

TEST_CASE("external generator speaks the v1 contract") {
  fixtures::MockHttp mock;
  json submitted;
  std::atomic<int> polls{0};
  mock.server.Post("/v1/generate", [&](const httplib::Request& req, httplib::Response& res) {
    submitted = json::parse(req.body);
    res.status = 202;
    res.set_content(R"({"job_id":"g1"})", "application/json");
  });
  mock.server.Get("/v1/generate/g1", [&](const httplib::Request&, httplib::Response& res) {
    if (++polls < 3) {
      res.set_content(R"({"state":"running"})", "application/json");
      return;
    }
    json body = {{"state", "succeeded"},
                 {"obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 1 4 3\nf 2 3 4\n"}};
    res.set_content(body.dump(), "application/json");
  });
  mock.server.Get("/v1/generate/bad", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"state":"failed","error":"out of memory"})", "application/json");
  });
  mock.start();

  const auto payload = payloadFromMask(rectMask(8, 8, 1, 1, 4, 4), "mug");
  ExternalGenerator gen(mock.url(), 5000, 10);
  const auto mesh = gen.generate({payload, {{"steps", "32"}}, {}}, {});
  CHECK(submitted["version"] == "v1");
  CHECK(submitted["label"] == "mug");
  CHECK(submitted["width"] == 8);
  CHECK(submitted["image_png_base64"] == payload.pngBase64);
  CHECK(submitted["params"]["steps"] == "32");
  CHECK(mesh.vertexCount() == 4);
  CHECK(mesh.faceCount() == 4);
  CHECK(polls == 3);

  ExternalGenerator down("http://127.0.0.1:" + std::to_string(fixtures::closedPort()), 1000, 10);
  CHECK(errorOf([&] { down.generate({payload, {}, {}}, {}); }) == "BackendUnavailable");

  // Unreachable backend through the queue surfaces as a failed job.
  JobQueue q({{GeneratorKind::External,
               std::make_shared<ExternalGenerator>(
                   "http://127.0.0.1:" + std::to_string(fixtures::closedPort()), 1000, 10)}},
             {1, 4});
  const auto job = q.wait(q.submit({payload, {}, {}}, GeneratorKind::External).jobId, 5s);
  CHECK((job.state == JobState::Failed));
  CHECK_FALSE(job.error.value_or("").empty());
}

TEST_CASE("external generator reports backend failure and timeout") {
  fixtures::MockHttp mock;
  mock.server.Post("/v1/generate", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"job_id":"slow"})", "application/json");
  });
  mock.server.Post("/f/v1/generate", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"job_id":"x"})", "application/json");
  });
  mock.server.Get("/f/v1/generate/x", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"state":"failed","error":"oom"})", "application/json");
  });
  mock.server.Get("/v1/generate/slow", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"state":"queued"})", "application/json");
  });
  mock.start();
  const auto payload = payloadFromMask(rectMask(8, 8, 1, 1, 4, 4));
  ExternalGenerator failing(mock.url() + "/f", 2000, 10);
  CHECK(errorOf([&] { failing.generate({payload, {}, {}}, {}); }) == "BackendUnavailable");
  ExternalGenerator slow(mock.url(), 200, 20);
  CHECK(errorOf([&] { slow.generate({payload, {}, {}}, {}); }) == "BackendTimeout");
}
