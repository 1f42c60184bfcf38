#include "clonar/evaluation/anova.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "clonar/error.hpp"

namespace clonar::evaluation {

namespace {

AnovaResult finish(double ssb, double ssw, long dfb, long dfw) {
  AnovaResult r;
  r.ssBetween = ssb;
  r.ssWithin = ssw;
  r.dfBetween = dfb;
  r.dfWithin = dfw;
  if (ssw <= 0.0) {
    if (ssb > 0.0) {
      r.F = std::numeric_limits<double>::infinity();
      r.p = 0.0;
    } else {
      r.F = 0.0;
      r.p = 1.0;
    }
    return r;
  }
  r.F = (ssb / static_cast<double>(dfb)) / (ssw / static_cast<double>(dfw));
  r.p = fSurvival(r.F, static_cast<double>(dfb), static_cast<double>(dfw));
  return r;
}

}  // namespace

GroupSummary summarize(std::span<const double> xs) {
  if (xs.size() < 2) fail(ErrorCode::InsufficientData, "a group needs at least two observations");
  double sum = 0.0;
  for (const double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return {static_cast<long>(xs.size()), mean, ss / static_cast<double>(xs.size() - 1)};
}

AnovaResult anovaFromRaw(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) fail(ErrorCode::InsufficientData, "ANOVA needs at least two groups");
  long total = 0;
  double grandSum = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) fail(ErrorCode::InsufficientData, "every group needs at least two observations");
    total += static_cast<long>(g.size());
    for (const double x : g) grandSum += x;
  }
  const double grand = grandSum / static_cast<double>(total);
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    double s = 0.0;
    for (const double x : g) s += x;
    const double mean = s / static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
    for (const double x : g) ssw += (x - mean) * (x - mean);
  }
  const long k = static_cast<long>(groups.size());
  return finish(ssb, ssw, k - 1, total - k);
}

AnovaResult anovaFromSummary(std::span<const GroupSummary> groups) {
  if (groups.size() < 2) fail(ErrorCode::InsufficientData, "ANOVA needs at least two groups");
  long total = 0;
  double weighted = 0.0;
  for (const auto& g : groups) {
    if (g.n < 2) fail(ErrorCode::InsufficientData, "every group needs n >= 2");
    if (!(g.variance >= 0.0)) fail(ErrorCode::InvalidArgument, "group variance must be >= 0");
    total += g.n;
    weighted += static_cast<double>(g.n) * g.mean;
  }
  const double grand = weighted / static_cast<double>(total);
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    ssb += static_cast<double>(g.n) * (g.mean - grand) * (g.mean - grand);
    ssw += static_cast<double>(g.n - 1) * g.variance;
  }
  const long k = static_cast<long>(groups.size());
  return finish(ssb, ssw, k - 1, total - k);
}

namespace {

// Continued fraction for I_x(a,b), modified Lentz.
double betaContinuedFraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 100000;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularizedIncompleteBeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) fail(ErrorCode::InvalidArgument, "beta parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) fail(ErrorCode::InvalidArgument, "x must lie in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double logFront = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(logFront);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * betaContinuedFraction(b, a, 1.0 - x) / b;
}

double fSurvival(double F, double dfBetween, double dfWithin) {
  if (!(dfBetween > 0.0) || !(dfWithin > 0.0)) {
    fail(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  }
  if (std::isnan(F) || F < 0.0) fail(ErrorCode::InvalidArgument, "F must be >= 0");
  if (F == 0.0) return 1.0;
  if (std::isinf(F)) return 0.0;
  const double x = dfWithin / (dfWithin + dfBetween * F);
  return regularizedIncompleteBeta(0.5 * dfWithin, 0.5 * dfBetween, x);
}

}  // namespace clonar::evaluation
