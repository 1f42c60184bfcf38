#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "clonar/error.hpp"
#include "clonar/evaluation/anova.hpp"
#include "clonar/evaluation/cohort_io.hpp"
#include "clonar/evaluation/sus.hpp"
#include "clonar/imaging/codec.hpp"
#include "clonar/meshops/assets.hpp"
#include "clonar/server/config.hpp"
#include "clonar/server/http_api.hpp"
#include "clonar/server/service.hpp"

namespace fs = std::filesystem;
using namespace clonar;
using nlohmann::json;

namespace {

std::string readText(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void writeBytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrorCode::EncodingFailure, "cannot write " + path.string());
}

void writeText(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text << "\n";
  if (!f) fail(ErrorCode::EncodingFailure, "cannot write " + path.string());
}

// A JSON file of [[x, y], ...] or inline "x,y x,y ..." (commas, semicolons
// and whitespace all separate numbers).
std::vector<imaging::Point2> parseZonePoints(const std::string& arg) {
  std::vector<imaging::Point2> pts;
  if (fs::is_regular_file(arg)) {
    const json doc = json::parse(readText(arg), nullptr, false);
    if (!doc.is_array()) fail(ErrorCode::InvalidArgument, arg + " must hold a JSON array of [x, y]");
    for (const auto& p : doc) {
      if (!p.is_array() || p.size() != 2) fail(ErrorCode::InvalidArgument, "zone points must be [x, y]");
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return pts;
  }
  std::string s = arg;
  for (char& c : s) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream in(s);
  std::vector<double> nums;
  for (std::string tok; in >> tok;) {
    try {
      std::size_t used = 0;
      nums.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad zone coordinate '" + tok + "'");
    }
  }
  if (nums.size() % 2 != 0) fail(ErrorCode::InvalidArgument, "zone points need an even number of values");
  for (std::size_t i = 0; i < nums.size(); i += 2) pts.push_back({nums[i], nums[i + 1]});
  return pts;
}

std::string safeName(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  return s;
}

int runServe(const std::string& configPath, const std::string& host, int port) {
  server::ServerConfig cfg = server::loadConfig(configPath);
  if (!host.empty()) cfg.host = host;
  if (port > 0) cfg.port = port;

  sigset_t sigs;
  sigemptyset(&sigs);
  sigaddset(&sigs, SIGINT);
  sigaddset(&sigs, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

  server::PipelineService svc(cfg);
  server::HttpApi api(svc);
  const int bound = api.start(cfg.host, cfg.port);
  std::cerr << "listening on http://" << cfg.host << ":" << bound << "\n";
  int sig = 0;
  sigwait(&sigs, &sig);
  std::cerr << "shutting down\n";
  api.stop();
  return 0;
}

int runPipeline(const std::string& configPath, const std::string& imagePath, const std::string& zoneArg,
                const std::string& backend, const std::string& outDir, std::size_t targetVertices) {
  server::ServerConfig cfg = configPath.empty() ? server::ServerConfig{} : server::loadConfig(configPath);
  cfg.generator.defaultBackend = generation::parseGeneratorKind(backend);
  if (targetVertices > 0) cfg.targetVertices = targetVertices;
  cfg.assetDir.reset();

  const std::string png = readText(imagePath);
  const std::vector<std::uint8_t> bytes(png.begin(), png.end());
  const bool zoneMode = !zoneArg.empty();

  server::PipelineService svc(cfg);
  const std::string id = svc.createCapture(bytes, zoneMode ? server::CaptureMode::Zone : server::CaptureMode::All);
  json report = {{"capture_id", id}, {"mode", zoneMode ? "zone" : "all"}};
  if (zoneMode) {
    const auto pts = parseZonePoints(zoneArg);
    svc.appendStroke(id, pts);
    const auto z = svc.finalizeZone(id);
    report["zone"] = {{"area_px", z.zone.areaPx}, {"vertex_count", z.zone.vertices.size()}};
    report["detection_ms"] = z.detectionMs;
  }

  fs::create_directories(outDir);
  const auto menu = svc.listObjects(id);
  std::vector<std::string> ids;
  for (const auto& e : menu) ids.push_back(e.objectId);
  const auto jobs = ids.empty() ? std::vector<std::string>{} : svc.requestGeneration(id, ids);

  json objects = json::array();
  int failures = 0;
  for (std::size_t i = 0; i < menu.size(); ++i) {
    const auto& e = menu[i];
    const std::string stem = std::to_string(i) + "_" + safeName(e.label);
    const fs::path cropPath = fs::path(outDir) / ("crop_" + stem + ".png");
    writeBytes(cropPath, imaging::encodePng(svc.objectCrop(id, e.objectId)));
    json obj = {{"object_id", e.objectId},
                {"label", e.label},
                {"confidence", e.confidence},
                {"bbox", {e.bbox.x, e.bbox.y, e.bbox.w, e.bbox.h}},
                {"crop", cropPath.string()}};
    const auto v = svc.waitForJob(jobs[i], std::chrono::milliseconds(cfg.generator.timeoutMs + 5000));
    obj["job_id"] = v.job.jobId;
    obj["state"] = generation::toString(v.job.state);
    if (v.job.state == generation::JobState::Succeeded) {
      const fs::path assetPath = fs::path(outDir) / ("model_" + stem + ".glb");
      writeBytes(assetPath, *svc.fetchAsset(jobs[i]));
      obj["asset"] = assetPath.string();
      obj["vertex_count"] = v.job.result->vertices.size();
      obj["face_count"] = v.job.result->faces.size();
      json t = json::object();
      if (v.job.timings.conversionMs) t["conversion_ms"] = *v.job.timings.conversionMs;
      if (v.job.timings.simplifyMs) t["simplify_ms"] = *v.job.timings.simplifyMs;
      if (v.job.timings.exportMs) t["export_ms"] = *v.job.timings.exportMs;
      obj["timings"] = t;
    } else {
      ++failures;
      obj["error"] = v.job.error.value_or("timed out");
    }
    objects.push_back(std::move(obj));
  }
  report["objects"] = std::move(objects);
  report["metrics"] = json::parse(server::toJson(svc.metricsReport()));
  const fs::path metricsPath = fs::path(outDir) / "metrics.json";
  writeText(metricsPath, report.dump(2));
  std::cout << menu.size() << " object(s), " << (menu.size() - failures) << " asset(s) written to "
            << outDir << "\n";
  return failures == 0 ? 0 : 1;
}

json summaryJson(const evaluation::GroupSummary& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"variance", s.variance}};
}

int runSus(const std::string& csvPath) {
  const auto people = evaluation::parseSusCsv(readText(csvPath));
  std::vector<evaluation::SusResponse> all;
  for (const auto& p : people) all.push_back(p.response);
  json groups = json::array();
  for (const auto& [name, scores] : evaluation::groupScores(people)) {
    json g = {{"name", name}, {"n", scores.size()}};
    double sum = 0;
    for (double s : scores) sum += s;
    g["mean"] = sum / static_cast<double>(scores.size());
    groups.push_back(std::move(g));
  }
  const json out = {{"participants", people.size()}, {"mean", evaluation::susMean(all)}, {"groups", groups}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int runAnova(const std::string& csvPath, const std::string& summaryPath) {
  std::vector<std::string> names;
  std::vector<evaluation::GroupSummary> sums;
  evaluation::AnovaResult r;
  if (!csvPath.empty()) {
    std::vector<std::vector<double>> raw;
    for (auto& [name, scores] : evaluation::groupScores(evaluation::parseSusCsv(readText(csvPath)))) {
      names.push_back(name);
      sums.push_back(evaluation::summarize(scores));
      raw.push_back(std::move(scores));
    }
    r = evaluation::anovaFromRaw(raw);
  } else {
    for (const auto& g : evaluation::parseSummaryJson(readText(summaryPath))) {
      names.push_back(g.name);
      sums.push_back(g.summary);
    }
    r = evaluation::anovaFromSummary(sums);
  }
  json groups = json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    json g = summaryJson(sums[i]);
    g["name"] = names[i];
    groups.push_back(std::move(g));
  }
  const json out = {{"F", r.F},
                    {"df_between", r.dfBetween},
                    {"df_within", r.dfWithin},
                    {"p", r.p},
                    {"ss_between", r.ssBetween},
                    {"ss_within", r.ssWithin},
                    {"groups", groups}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clonar: lasso capture to 3D asset pipeline"};
  app.require_subcommand(1);

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string configPath, host;
  int port = 0;
  serve->add_option("--config", configPath, "JSON config file")->check(CLI::ExistingFile);
  serve->add_option("--host", host, "Bind address (overrides config)");
  serve->add_option("--port", port, "Port (overrides config)");

  auto* pipeline = app.add_subcommand("pipeline", "Headless capture, detection, generation and export");
  std::string image, zone, backend = "stub", out = "clonar-out", pipelineConfig;
  std::size_t target = 0;
  pipeline->add_option("--image", image, "Frame PNG")->required()->check(CLI::ExistingFile);
  pipeline->add_option("--zone-points", zone,
                       "Lasso points as \"x,y x,y ...\" or a JSON file of [[x,y],...]; omit for all-objects mode");
  pipeline->add_option("--backend", backend, "Generator backend")->check(CLI::IsMember({"stub", "external"}));
  pipeline->add_option("--out", out, "Output directory");
  pipeline->add_option("--config", pipelineConfig, "JSON config file")->check(CLI::ExistingFile);
  pipeline->add_option("--target-vertices", target, "Decimation target (overrides config)");

  auto* eval = app.add_subcommand("eval", "Usability statistics");
  eval->require_subcommand(1);
  auto* sus = eval->add_subcommand("sus", "SUS scores from a questionnaire CSV");
  std::string susCsv;
  sus->add_option("--csv", susCsv, "group,q1..q10 per row")->required()->check(CLI::ExistingFile);
  auto* anova = eval->add_subcommand("anova", "One-way ANOVA across groups");
  std::string anovaCsv, anovaSummary;
  auto* csvOpt = anova->add_option("--csv", anovaCsv, "Questionnaire CSV")->check(CLI::ExistingFile);
  auto* sumOpt = anova->add_option("--summary", anovaSummary, "Group summary JSON")->check(CLI::ExistingFile);
  csvOpt->excludes(sumOpt);
  anova->require_option(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return runServe(configPath, host, port);
    if (*pipeline) return runPipeline(pipelineConfig, image, zone, backend, out, target);
    if (*sus) return runSus(susCsv);
    if (*anova) return runAnova(anovaCsv, anovaSummary);
  } catch (const Error& e) {
    std::cerr << "error: " << toString(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
