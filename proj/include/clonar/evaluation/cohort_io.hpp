#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "clonar/evaluation/anova.hpp"
#include "clonar/evaluation/sus.hpp"

namespace clonar::evaluation {

struct Participant {
  std::string group;
  SusResponse response;
};

/// CSV, one participant per row: group,q1,...,q10. A first row whose second
/// field is not an integer is taken as a header. Blank lines and lines
/// starting with '#' are skipped. Throws InvalidArgument / OutOfRangeItem.
std::vector<Participant> parseSusCsv(std::string_view text);

struct NamedGroup {
  std::string name;
  GroupSummary summary;
};

/// {"groups":[{"name":"...","n":20,"mean":64.38,"variance":50.32}, ...]}
/// Throws InvalidArgument.
std::vector<NamedGroup> parseSummaryJson(std::string_view text);

/// Group SUS scores by label, in order of first appearance.
std::vector<std::pair<std::string, std::vector<double>>> groupScores(
    const std::vector<Participant>& participants);

}  // namespace clonar::evaluation
