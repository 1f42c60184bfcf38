#include <doctest.h>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "clonar/evaluation/anova.hpp"
#include "clonar/evaluation/cohort_io.hpp"
#include "clonar/evaluation/sus.hpp"
#include "fixtures.hpp"

using namespace clonar;
using namespace clonar::evaluation;
using fixtures::errorOf;

namespace {

SusResponse resp(std::array<int, 10> items) { return SusResponse{items}; }

// Upper tail of F(d1, d2) as the ratio of beta-density integrals on either
// side of x = d2 / (d2 + d1 F), integrated numerically.
double integratedSurvival(double F, double d1, double d2) {
  if (F == 0) return 1.0;
  const double a = d2 / 2, b = d1 / 2;
  const double x = d2 / (d2 + d1 * F);
  // tc is the signed distance to the nearer endpoint; it keeps 1 - t exact
  // near the right end of the unit interval.
  auto densityOn = [&](double lo, double hi) {
    return [=](double t, double tc) {
      const double oneMinus = (tc > 0 && hi == 1.0) ? tc : 1.0 - t;
      const double left = (tc < 0 && lo == 0.0) ? -tc : t;
      if (left <= 0 || oneMinus <= 0) return 0.0;
      const double la = a == 1 ? 0.0 : (a - 1) * std::log(left);
      const double lb = b == 1 ? 0.0 : (b - 1) * std::log(oneMinus);
      return std::exp(la + lb);
    };
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double left = x > 0 ? integrator.integrate(densityOn(0.0, x), 0.0, x) : 0.0;
  const double right = x < 1 ? integrator.integrate(densityOn(x, 1.0), x, 1.0) : 0.0;
  return left / (left + right);
}

// Hand definitional sums of squares.
double oracleF(const std::vector<std::vector<double>>& groups) {
  double total = 0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    total += std::accumulate(g.begin(), g.end(), 0.0);
    n += g.size();
  }
  const double grand = total / n;
  double ssb = 0, ssw = 0;
  for (const auto& g : groups) {
    const double m = std::accumulate(g.begin(), g.end(), 0.0) / g.size();
    ssb += g.size() * (m - grand) * (m - grand);
    for (double y : g) ssw += (y - m) * (y - m);
  }
  const double dfb = groups.size() - 1.0, dfw = double(n) - groups.size();
  return (ssb / dfb) / (ssw / dfw);
}

}  // namespace

TEST_CASE("susScore formula") {
  CHECK(susScore(resp({5, 1, 5, 1, 5, 1, 5, 1, 5, 1})) == 100.0);
  CHECK(susScore(resp({3, 3, 3, 3, 3, 3, 3, 3, 3, 3})) == 50.0);
  CHECK(susScore(resp({4, 2, 4, 2, 4, 2, 4, 2, 4, 2})) == 75.0);
  CHECK(susScore(resp({1, 5, 1, 5, 1, 5, 1, 5, 1, 5})) == 0.0);
  CHECK(errorOf([] { susScore(resp({0, 3, 3, 3, 3, 3, 3, 3, 3, 3})); }) == "OutOfRangeItem");
  CHECK(errorOf([] { susScore(resp({3, 3, 3, 3, 3, 3, 3, 3, 3, 6})); }) == "OutOfRangeItem");
  const std::vector<int> nine(9, 3);
  CHECK(errorOf([&] { SusResponse::fromItems(nine); }) == "InvalidArgument");
}

TEST_CASE("susScore monotone in positive items, antitone in negative items") {
  std::mt19937 rng(61);
  std::uniform_int_distribution<int> item(1, 5);
  for (int t = 0; t < 500; ++t) {
    std::array<int, 10> it;
    for (auto& x : it) x = item(rng);
    const double base = susScore(resp(it));
    for (int k = 0; k < 10; ++k) {
      if (it[k] == 5) continue;
      auto up = it;
      ++up[k];
      const double delta = susScore(resp(up)) - base;
      CHECK(delta == (k % 2 == 0 ? 2.5 : -2.5));
    }
  }
}

TEST_CASE("susMean of a 35-participant cohort") {
  // 30 responses with adjusted sum 28 and 5 with adjusted sum 27: total 975.
  std::vector<SusResponse> cohort;
  for (int i = 0; i < 35; ++i) {
    std::array<int, 10> it{4, 2, 4, 2, 4, 2, 4, 2, 4, 2};  // adjusted 30
    it[static_cast<std::size_t>(i % 10)] += (i % 2 == 0) ? -1 : 1;  // 29
    it[static_cast<std::size_t>((i + 3) % 10)] += ((i + 3) % 2 == 0) ? -1 : 1;  // 28
    if (i < 5) it[static_cast<std::size_t>((i + 5) % 10)] += ((i + 5) % 2 == 0) ? -1 : 1;  // 27
    cohort.push_back(resp(it));
  }
  long adjusted = 0;
  for (const auto& r : cohort) {
    for (int k = 0; k < 10; ++k) adjusted += (k % 2 == 0) ? r.items[k] - 1 : 5 - r.items[k];
  }
  REQUIRE(adjusted == 975);
  const double hand = 2.5 * adjusted / 35.0;
  CHECK(std::abs(susMean(cohort) - hand) <= 1e-9);
  // 69.64 itself is not a reachable mean for 35 scores on a 2.5 grid; this
  // cohort is the nearest one and rounds to it.
  CHECK(std::abs(susMean(cohort) - 69.64) < 0.005);
  CHECK(susMean(std::vector<SusResponse>{resp({3, 3, 3, 3, 3, 3, 3, 3, 3, 3})}) == 50.0);
  CHECK(errorOf([] { susMean(std::vector<SusResponse>{}); }) == "InsufficientData");
}

TEST_CASE("anova worked examples") {
  const std::vector<std::vector<double>> g{{1, 2, 3}, {2, 3, 4}};
  const auto r = anovaFromRaw(g);
  CHECK(std::abs(r.F - 1.5) <= 1e-9);
  CHECK(r.dfBetween == 1);
  CHECK(r.dfWithin == 4);
  CHECK(r.ssBetween == doctest::Approx(1.5));
  CHECK(r.ssWithin == doctest::Approx(4.0));

  const std::vector<GroupSummary> s{{3, 2, 1}, {3, 3, 1}};
  CHECK(std::abs(anovaFromSummary(s).F - 1.5) <= 1e-9);

  const std::vector<std::vector<double>> same{{1, 2, 3}, {1, 2, 3}};
  const auto z = anovaFromRaw(same);
  CHECK(z.F == 0.0);
  CHECK(z.p == 1.0);
  const std::vector<GroupSummary> eq{{5, 10, 3}, {8, 10, 40}};
  CHECK(anovaFromSummary(eq).F == 0.0);

  const std::vector<std::vector<double>> flat{{2, 2, 2}, {5, 5}};
  const auto inf = anovaFromRaw(flat);
  CHECK(std::isinf(inf.F));
  CHECK(inf.p == 0.0);
  const std::vector<std::vector<double>> flatSame{{2, 2}, {2, 2, 2}};
  CHECK(anovaFromRaw(flatSame).p == 1.0);

  const std::vector<std::vector<double>> one{{1, 2, 3}};
  CHECK(errorOf([&] { anovaFromRaw(one); }) == "InsufficientData");
  const std::vector<std::vector<double>> tiny{{1, 2, 3}, {4}};
  CHECK(errorOf([&] { anovaFromRaw(tiny); }) == "InsufficientData");
  const std::vector<GroupSummary> neg{{3, 2, -1}, {3, 3, 1}};
  CHECK(errorOf([&] { anovaFromSummary(neg); }) == "InvalidArgument");
}

TEST_CASE("anova from group summary statistics") {
  const std::vector<GroupSummary> table{{20, 64.38, 50.32}, {15, 80.71, 42.17}};
  const auto r = anovaFromSummary(table);
  const double grand = (20 * 64.38 + 15 * 80.71) / 35.0;
  const double ssb = 20 * std::pow(64.38 - grand, 2) + 15 * std::pow(80.71 - grand, 2);
  const double ssw = 19 * 50.32 + 14 * 42.17;
  const double oracle = (ssb / 1) / (ssw / 33);
  CHECK(std::abs(r.F - oracle) <= 1e-9 * oracle);
  CHECK(r.F == doctest::Approx(48.78).epsilon(0.0005));
  CHECK(r.dfBetween == 1);
  CHECK(r.dfWithin == 33);
  CHECK(r.p < 1e-6);
}

TEST_CASE("raw and summary agree on random cohorts") {
  std::mt19937 rng(67);
  std::uniform_int_distribution<int> groups(2, 5), size(2, 30);
  std::normal_distribution<double> y(60, 15);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::vector<double>> raw(static_cast<std::size_t>(groups(rng)));
    std::vector<GroupSummary> sums;
    for (auto& g : raw) {
      const int n = size(rng);
      for (int i = 0; i < n; ++i) g.push_back(y(rng));
      sums.push_back(summarize(g));
    }
    const auto a = anovaFromRaw(raw);
    const auto b = anovaFromSummary(sums);
    CHECK(std::abs(a.F - b.F) <= 1e-9 * std::max(1.0, a.F));
    CHECK(std::abs(a.p - b.p) <= 1e-9);
    CHECK(std::abs(a.F - oracleF(raw)) <= 1e-9 * std::max(1.0, a.F));
    CHECK(a.dfWithin == b.dfWithin);
  }
}

TEST_CASE("anova is affine invariant") {
  std::mt19937 rng(71);
  std::normal_distribution<double> y(50, 10);
  std::uniform_real_distribution<double> scale(-20, 20), shift(-1000, 1000);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::vector<double>> raw(3);
    for (auto& g : raw) {
      for (int i = 0; i < 6 + t % 5; ++i) g.push_back(y(rng));
    }
    double a = scale(rng);
    if (std::abs(a) < 0.1) a = 0.5;
    const double b = shift(rng);
    auto moved = raw;
    for (auto& g : moved) {
      for (auto& v : g) v = a * v + b;
    }
    const auto r0 = anovaFromRaw(raw), r1 = anovaFromRaw(moved);
    CHECK(std::abs(r1.F - r0.F) <= 1e-9 * r0.F);
    CHECK(std::abs(r1.p - r0.p) <= 1e-9 * std::max(r0.p, 1e-300) + 1e-15);
  }
}

TEST_CASE("summarize uses the n-1 denominator") {
  const std::vector<double> x{1, 2, 3, 4};
  const auto s = summarize(x);
  CHECK(s.n == 4);
  CHECK(s.mean == 2.5);
  CHECK(s.variance == doctest::Approx(5.0 / 3.0));
  const std::vector<double> single{1};
  CHECK(errorOf([&] { summarize(single); }) == "InsufficientData");
}

TEST_CASE("fSurvival limits and worked value") {
  CHECK(fSurvival(0, 1, 4) == 1.0);
  CHECK(fSurvival(1.5, 1, 4) == doctest::Approx(0.2879).epsilon(1e-4));
  CHECK(std::abs(fSurvival(1.5, 1, 4) - integratedSurvival(1.5, 1, 4)) <= 1e-8);
  CHECK(fSurvival(1e12, 3, 10) < 1e-12);
  CHECK(fSurvival(std::numeric_limits<double>::infinity(), 3, 10) == 0.0);
  CHECK(errorOf([] { fSurvival(-1, 1, 4); }) == "InvalidArgument");
  CHECK(errorOf([] { fSurvival(std::nan(""), 1, 4); }) == "InvalidArgument");
  CHECK(errorOf([] { fSurvival(1, 0, 4); }) == "InvalidArgument");
}

TEST_CASE("fSurvival matches numeric integration and is decreasing") {
  std::mt19937 rng(73);
  std::uniform_real_distribution<double> F(0, 100);
  std::uniform_int_distribution<int> df(1, 200);
  double worst = 0;
  for (int t = 0; t < 300; ++t) {
    const double f = F(rng), d1 = df(rng), d2 = df(rng);
    const double ours = fSurvival(f, d1, d2);
    const double integ = integratedSurvival(f, d1, d2);
    worst = std::max(worst, std::abs(ours - integ));
    REQUIRE(std::abs(ours - integ) <= 1e-8);
    const boost::math::fisher_f_distribution<double> dist(d1, d2);
    CHECK(std::abs(ours - boost::math::cdf(boost::math::complement(dist, f))) <= 1e-10);
  }
  MESSAGE("largest deviation from the integration oracle: " << worst);
  for (const auto& [d1, d2] : std::vector<std::pair<double, double>>{{1, 4}, {2, 33}, {5, 200}, {200, 3}}) {
    double prev = 2.0;
    for (double f = 0; f <= 100; f += 0.25) {
      const double p = fSurvival(f, d1, d2);
      if (prev > 1e-300) CHECK(p < prev);
      prev = p;
    }
  }
}

TEST_CASE("regularized incomplete beta edge values") {
  CHECK(regularizedIncompleteBeta(2, 3, 0) == 0.0);
  CHECK(regularizedIncompleteBeta(2, 3, 1) == 1.0);
  CHECK(regularizedIncompleteBeta(1, 1, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
  // I_x(a, 1) = x^a.
  CHECK(regularizedIncompleteBeta(3.5, 1, 0.6) == doctest::Approx(std::pow(0.6, 3.5)).epsilon(1e-13));
}

TEST_CASE("SUS CSV parsing") {
  const auto ps = parseSusCsv(
      "group,q1,q2,q3,q4,q5,q6,q7,q8,q9,q10\n"
      "# comment\n"
      "rarely,4,2,4,2,4,2,4,2,4,2\n"
      "\n"
      "often,5,1,5,1,5,1,5,1,5,1\n"
      "rarely,3,3,3,3,3,3,3,3,3,3\n");
  REQUIRE(ps.size() == 3);
  CHECK(ps[0].group == "rarely");
  CHECK(susScore(ps[1].response) == 100);
  const auto groups = groupScores(ps);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].first == "rarely");
  CHECK(groups[0].second == std::vector<double>{75, 50});
  CHECK(parseSusCsv("a,3,3,3,3,3,3,3,3,3,3\n").size() == 1);
  CHECK(errorOf([] { parseSusCsv("a,3,3,3\n"); }) == "InvalidArgument");
  CHECK(errorOf([] { parseSusCsv("a,3,3,3,3,3,3,3,3,3,9\n"); }) == "OutOfRangeItem");
  CHECK(errorOf([] { parseSusCsv("a,3,3,3,3,x,3,3,3,3,3\n"); }) == "InvalidArgument");
}

TEST_CASE("summary JSON parsing") {
  const auto gs = parseSummaryJson(
      R"({"groups":[{"name":"rarely","n":20,"mean":64.38,"variance":50.32},)"
      R"({"name":"often","n":15,"mean":80.71,"variance":42.17}]})");
  REQUIRE(gs.size() == 2);
  CHECK(gs[1].summary.n == 15);
  CHECK(gs[0].summary.variance == 50.32);
  CHECK(errorOf([] { parseSummaryJson("{}"); }) == "InvalidArgument");
  CHECK(errorOf([] { parseSummaryJson("nope"); }) == "InvalidArgument");
}
