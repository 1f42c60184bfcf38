#include "clonar/evaluation/cohort_io.hpp"

#include <charconv>
#include <nlohmann/json.hpp>

#include "clonar/error.hpp"

namespace clonar::evaluation {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> splitCsv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                           : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parseInt(std::string_view s, int& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

}  // namespace

std::vector<Participant> parseSusCsv(std::string_view text) {
  std::vector<Participant> out;
  std::size_t start = 0, lineNo = 0;
  bool first = true;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    ++lineNo;
    if (line.empty() || line.front() == '#') continue;

    const auto fields = splitCsv(line);
    int probe = 0;
    if (first && (fields.size() < 2 || !parseInt(fields[1], probe))) {
      first = false;
      continue;  // header
    }
    first = false;
    if (fields.size() != 11) {
      fail(ErrorCode::InvalidArgument, "line " + std::to_string(lineNo) +
                                           ": expected group + 10 items, got " +
                                           std::to_string(fields.size()) + " fields");
    }
    Participant p;
    p.group = std::string(fields[0]);
    for (std::size_t i = 0; i < 10; ++i) {
      if (!parseInt(fields[i + 1], p.response.items[i])) {
        fail(ErrorCode::InvalidArgument, "line " + std::to_string(lineNo) + ": item " +
                                             std::to_string(i + 1) + " is not an integer");
      }
    }
    susScore(p.response);  // range check with the item number in the message
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<NamedGroup> parseSummaryJson(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    std::vector<NamedGroup> out;
    for (const auto& g : doc.at("groups")) {
      NamedGroup ng;
      ng.name = g.value("name", "group" + std::to_string(out.size() + 1));
      ng.summary.n = g.at("n").get<long>();
      ng.summary.mean = g.at("mean").get<double>();
      ng.summary.variance = g.at("variance").get<double>();
      out.push_back(std::move(ng));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("summary JSON: ") + e.what());
  }
}

std::vector<std::pair<std::string, std::vector<double>>> groupScores(
    const std::vector<Participant>& participants) {
  std::vector<std::pair<std::string, std::vector<double>>> groups;
  for (const auto& p : participants) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == p.group; });
    if (it == groups.end()) {
      groups.push_back({p.group, {}});
      it = std::prev(groups.end());
    }
    it->second.push_back(susScore(p.response));
  }
  return groups;
}

}  // namespace clonar::evaluation
