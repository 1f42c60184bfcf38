#pragma once

#include <array>
#include <span>

namespace clonar::evaluation {

/// Ten System Usability Scale answers in [1,5]; items 1,3,5,7,9 are
/// positively worded, 2,4,6,8,10 negatively worded.
struct SusResponse {
  std::array<int, 10> items{};

  /// Throws InvalidArgument unless exactly ten items are given.
  static SusResponse fromItems(std::span<const int> items);
};

/// 2.5 * sum of adjusted items: (score - 1) for positive items, (5 - score)
/// for negative ones. Throws OutOfRangeItem.
double susScore(const SusResponse& r);

/// Throws InsufficientData for an empty cohort.
double susMean(std::span<const SusResponse> responses);

}  // namespace clonar::evaluation
