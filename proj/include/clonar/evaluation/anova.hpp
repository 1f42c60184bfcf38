#pragma once

#include <span>
#include <vector>

namespace clonar::evaluation {

struct GroupSummary {
  long n = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance, n - 1 denominator
};

struct AnovaResult {
  double F = 0.0;
  long dfBetween = 0;
  long dfWithin = 0;
  double p = 1.0;
  double ssBetween = 0.0;
  double ssWithin = 0.0;
};

/// Throws InsufficientData when fewer than two observations are given.
GroupSummary summarize(std::span<const double> observations);

/// Classical one-way ANOVA by definitional sums of squares. With zero
/// within-group variation, F is +infinity and p is 0 when the group means
/// differ, and F = 0, p = 1 when they do not.
/// Throws InsufficientData (fewer than two groups, or a group with n < 2).
AnovaResult anovaFromRaw(std::span<const std::vector<double>> groups);

/// Same statistic from per-group n, mean and sample variance.
/// Throws InsufficientData or InvalidArgument (negative variance).
AnovaResult anovaFromSummary(std::span<const GroupSummary> groups);

/// Regularised incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularizedIncompleteBeta(double a, double b, double x);

/// Upper-tail probability of the F(dfBetween, dfWithin) distribution.
double fSurvival(double F, double dfBetween, double dfWithin);

}  // namespace clonar::evaluation
