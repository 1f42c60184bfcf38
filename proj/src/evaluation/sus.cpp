#include "clonar/evaluation/sus.hpp"

#include <string>

#include "clonar/error.hpp"

namespace clonar::evaluation {

SusResponse SusResponse::fromItems(std::span<const int> items) {
  if (items.size() != 10) {
    fail(ErrorCode::InvalidArgument,
         "a SUS response has 10 items, got " + std::to_string(items.size()));
  }
  SusResponse r;
  std::copy(items.begin(), items.end(), r.items.begin());
  return r;
}

double susScore(const SusResponse& r) {
  int adjusted = 0;
  for (std::size_t i = 0; i < r.items.size(); ++i) {
    const int score = r.items[i];
    if (score < 1 || score > 5) {
      fail(ErrorCode::OutOfRangeItem,
           "SUS item " + std::to_string(i + 1) + " = " + std::to_string(score) + " outside [1,5]");
    }
    adjusted += (i % 2 == 0) ? score - 1 : 5 - score;
  }
  return 2.5 * adjusted;
}

double susMean(std::span<const SusResponse> responses) {
  if (responses.empty()) fail(ErrorCode::InsufficientData, "no SUS responses");
  double sum = 0.0;
  for (const auto& r : responses) sum += susScore(r);
  return sum / static_cast<double>(responses.size());
}

}  // namespace clonar::evaluation
