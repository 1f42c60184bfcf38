#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace clonar::server {

/// One pipeline observation. Every field is optional so stages can report
/// independently; GPU fields are backend-reported and passed through as-is.
struct MetricsRecord {
  std::optional<double> detectionMs;
  std::optional<double> conversionMs;
  std::optional<double> simplifyMs;
  std::optional<double> exportMs;
  std::optional<double> loadRenderMs;
  std::optional<double> gpuUtilPct;
  std::optional<double> gpuMemGb;
};

struct FieldStats {
  std::size_t count = 0;
  std::optional<double> mean;
  std::optional<double> p50;
  std::optional<double> p95;
};

struct TableRow {
  std::string metric;
  std::optional<double> value;
};

struct MetricsReport {
  /// Keyed by field name: detectionMs, conversionMs, simplifyMs, exportMs,
  /// loadRenderMs, gpuUtilPct, gpuMemGb.
  std::map<std::string, FieldStats> fields;
  /// Summary rows in seconds / percent / GB, computed from the means.
  std::vector<TableRow> table;
};

/// Linear interpolation between closest ranks; q in [0,1]. Empty input -> nullopt.
std::optional<double> percentile(std::vector<double> values, double q);

/// {"fields":{name:{count,mean,p50,p95}},"table":[{metric,value}]}; missing
/// values are null.
std::string toJson(const MetricsReport& report);

/// Append-only log; aggregation happens on read.
class MetricsLog {
 public:
  /// Throws InvalidArgument for negative durations.
  void ingest(const MetricsRecord& r);
  MetricsReport report() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<MetricsRecord> records_;
};

}  // namespace clonar::server
