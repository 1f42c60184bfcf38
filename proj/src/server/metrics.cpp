#include "clonar/server/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "clonar/error.hpp"

namespace clonar::server {

std::optional<double> percentile(std::vector<double> values, double q) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const double rank = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  return values[lo] + (rank - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

using Field = std::optional<double> MetricsRecord::*;

struct FieldSpec {
  const char* name;
  Field member;
};

constexpr FieldSpec kFields[] = {
    {"detectionMs", &MetricsRecord::detectionMs},
    {"conversionMs", &MetricsRecord::conversionMs},
    {"simplifyMs", &MetricsRecord::simplifyMs},
    {"exportMs", &MetricsRecord::exportMs},
    {"loadRenderMs", &MetricsRecord::loadRenderMs},
    {"gpuUtilPct", &MetricsRecord::gpuUtilPct},
    {"gpuMemGb", &MetricsRecord::gpuMemGb},
};

}  // namespace

void MetricsLog::ingest(const MetricsRecord& r) {
  for (const auto& f : kFields) {
    const auto& v = r.*(f.member);
    if (v && !std::isfinite(*v)) {
      fail(ErrorCode::InvalidArgument, std::string(f.name) + " must be finite");
    }
  }
  for (const auto* d : {&r.detectionMs, &r.conversionMs, &r.simplifyMs, &r.exportMs, &r.loadRenderMs}) {
    if (*d && **d < 0.0) fail(ErrorCode::InvalidArgument, "durations must be non-negative");
  }
  std::lock_guard lk(mu_);
  records_.push_back(r);
}

std::size_t MetricsLog::size() const {
  std::lock_guard lk(mu_);
  return records_.size();
}

MetricsReport MetricsLog::report() const {
  std::vector<MetricsRecord> snapshot;
  {
    std::lock_guard lk(mu_);
    snapshot = records_;
  }
  MetricsReport rep;
  for (const auto& f : kFields) {
    std::vector<double> values;
    for (const auto& r : snapshot) {
      if (const auto& v = r.*(f.member)) values.push_back(*v);
    }
    FieldStats s;
    s.count = values.size();
    if (!values.empty()) {
      double sum = 0.0;
      for (const double v : values) sum += v;
      s.mean = sum / static_cast<double>(values.size());
      s.p50 = percentile(values, 0.50);
      s.p95 = percentile(values, 0.95);
    }
    rep.fields[f.name] = s;
  }

  auto seconds = [&](const char* field) -> std::optional<double> {
    const auto& m = rep.fields[field].mean;
    return m ? std::optional<double>(*m / 1000.0) : std::nullopt;
  };
  rep.table = {
      {"Image Processing for Object Detection Time (s)", seconds("detectionMs")},
      {"Image-to-3D Conversion Time (s)", seconds("conversionMs")},
      {"Model Simplification Time (s)", seconds("simplifyMs")},
      {"Load and Render Time (s)", seconds("loadRenderMs")},
      {"Average GPU Utilization (%)", rep.fields["gpuUtilPct"].mean},
      {"GPU Memory Consumption (GB)", rep.fields["gpuMemGb"].mean},
  };
  return rep;
}

namespace {

nlohmann::json optionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string toJson(const MetricsReport& report) {
  nlohmann::json fields = nlohmann::json::object();
  for (const auto& [name, f] : report.fields) {
    fields[name] = {{"count", f.count},
                    {"mean", optionalJson(f.mean)},
                    {"p50", optionalJson(f.p50)},
                    {"p95", optionalJson(f.p95)}};
  }
  nlohmann::json table = nlohmann::json::array();
  for (const auto& row : report.table) {
    table.push_back({{"metric", row.metric}, {"value", optionalJson(row.value)}});
  }
  return nlohmann::json{{"fields", std::move(fields)}, {"table", std::move(table)}}.dump();
}

}  // namespace clonar::server
