#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "gamelab/optimize.hpp"
#include "gamelab/rng.hpp"

using namespace gamelab;

namespace {

ResponseDistribution dist(std::vector<double> probs) {
  ResponseDistribution d;
  d.setting_id = "s";
  d.counts = probs;
  d.total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& c : probs) c /= d.total;
  d.probs = probs;
  return d;
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double out = 0;
  for (std::size_t i = 0; i < a.size(); ++i) out += std::fabs(a[i] - b[i]);
  return out;
}

}  // namespace

TEST_CASE("distance oracles") {
  std::vector<double> p = {0.5, 0.5, 0.0};
  std::vector<double> q = {0.25, 0.25, 0.5};

  DistanceMeasure kl{DistanceKind::kForwardKl, std::nullopt};
  // KL(p||q) = 0.5 log(0.5/0.25) * 2 = log 2.
  CHECK(distance(p, q, kl) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(distance(p, p, kl) == doctest::Approx(0.0));
  // Positive reference mass on a zero model cell is undefined unsmoothed.
  CHECK_THROWS_AS(distance(q, p, kl), std::domain_error);
  DistanceMeasure kls{DistanceKind::kForwardKl, 0.2};
  CHECK(distance(q, p, kls) > 0);
  CHECK(std::isfinite(distance(q, p, kls)));

  DistanceMeasure mae{DistanceKind::kMeanAbsoluteError, std::nullopt};
  // Mean of |dp| = (0.25 + 0.25 + 0.5) / 3.
  CHECK(distance(p, q, mae) == doctest::Approx(1.0 / 3));

  DistanceMeasure cdf{DistanceKind::kCdfAbsolute, std::nullopt};
  // |F_p - F_q| at the two interior cut points: 0.25 + 0.5.
  CHECK(distance(p, q, cdf) == doctest::Approx(0.75));

  DistanceMeasure emd{DistanceKind::kEarthMover1D, std::nullopt};
  CHECK(distance(p, q, emd) == doctest::Approx(distance(p, q, cdf)));

  // Relabeling both distributions the same way leaves pointwise measures
  // alone but changes the order-aware ones.
  std::vector<double> far_a = {1.0, 0.0, 0.0}, far_b = {0.0, 0.0, 1.0};
  std::vector<double> near_a = {0.0, 1.0, 0.0}, near_b = {0.0, 0.0, 1.0};
  CHECK(distance(near_a, near_b, mae) == doctest::Approx(distance(far_a, far_b, mae)));
  CHECK(distance(far_a, far_b, emd) == doctest::Approx(2.0));
  CHECK(distance(near_a, near_b, emd) == doctest::Approx(1.0));

  CHECK_THROWS(distance(p, {0.5, 0.5}, mae));
}

TEST_CASE("measure ids round-trip") {
  for (DistanceKind k :
       {DistanceKind::kForwardKl, DistanceKind::kCdfAbsolute,
        DistanceKind::kMeanAbsoluteError, DistanceKind::kEarthMover1D}) {
    DistanceMeasure m = measure_from_id(measure_id(k));
    CHECK(m.kind == k);
  }
  CHECK_THROWS(measure_from_id("not-a-measure"));
}

TEST_CASE("simplex projection") {
  std::vector<double> v = project_to_simplex({0.4, 0.3, 0.3});
  CHECK(l1(v, {0.4, 0.3, 0.3}) == doctest::Approx(0.0));

  v = project_to_simplex({2.0, 0.0, 0.0});
  CHECK(l1(v, {1.0, 0.0, 0.0}) == doctest::Approx(0.0));

  v = project_to_simplex({-5.0, -5.0, -5.0});
  CHECK(l1(v, std::vector<double>(3, 1.0 / 3)) < 1e-12);

  Rng rng(2024);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> raw(6);
    for (double& x : raw) x = rng.normal() * 3;
    std::vector<double> p = project_to_simplex(raw);
    double sum = 0;
    for (double x : p) {
      CHECK(x >= -1e-12);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0));
    // Projection is the nearest simplex point; compare against jitters.
    auto sqdist = [&](const std::vector<double>& a) {
      double s = 0;
      for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - raw[i]) * (a[i] - raw[i]);
      return s;
    };
    double best = sqdist(p);
    for (int j = 0; j < 20; ++j) {
      std::vector<double> q = p;
      int a = int(rng.uniform_int(6)), b = int(rng.uniform_int(6));
      double step = std::min(0.05, q[a]);
      q[a] -= step;
      q[b] += step;
      CHECK(sqdist(q) >= best - 1e-9);
    }
  }
}

TEST_CASE("mixture weights recover a planted blend") {
  std::vector<ResponseDistribution> cands = {
      dist({0.7, 0.2, 0.05, 0.05}), dist({0.05, 0.15, 0.3, 0.5})};
  std::vector<double> truth = {0.3, 0.7};
  std::vector<double> blended(4);
  for (int a = 0; a < 4; ++a)
    blended[a] =
        truth[0] * cands[0].probs[a] + truth[1] * cands[1].probs[a];
  ResponseDistribution target = dist(blended);

  for (DistanceKind k : {DistanceKind::kForwardKl, DistanceKind::kCdfAbsolute,
                         DistanceKind::kMeanAbsoluteError}) {
    DistanceMeasure m{k, std::nullopt};
    MixtureFit fit = select_mixture(cands, target, m, 8, 42);
    CHECK(l1(fit.weights, truth) < 1e-3);
    CHECK(fit.objective < 1e-6);
    // The trace only ever improves.
    for (std::size_t i = 1; i < fit.trace.size(); ++i)
      CHECK(fit.trace[i] <= fit.trace[i - 1] + 1e-12);
  }
}

TEST_CASE("mixture fit never loses to a vertex") {
  Rng rng(99);
  DistanceMeasure m{DistanceKind::kForwardKl, 0.05};
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<ResponseDistribution> cands;
    for (int c = 0; c < 4; ++c) {
      std::vector<double> w(5);
      double s = 0;
      for (double& x : w) s += (x = rng.uniform01() + 0.01);
      for (double& x : w) x /= s;
      cands.push_back(dist(w));
    }
    std::vector<double> t(5);
    double s = 0;
    for (double& x : t) s += (x = rng.uniform01() + 0.01);
    for (double& x : t) x /= s;
    ResponseDistribution target = dist(t);

    MixtureFit fit = select_mixture(cands, target, m, 4, 1000 + trial);
    for (const auto& c : cands)
      CHECK(fit.objective <= distance(target, c, m) + 1e-9);

    MixtureFit again = select_mixture(cands, target, m, 4, 1000 + trial);
    CHECK(again.weights == fit.weights);
  }
}

TEST_CASE("improvement over baseline is a difference of distances") {
  ResponseDistribution target = dist({0.6, 0.4});
  ResponseDistribution fitted = dist({0.55, 0.45});
  ResponseDistribution baseline = dist({0.5, 0.5});
  DistanceMeasure mae{DistanceKind::kMeanAbsoluteError, std::nullopt};
  double got = improvement_over_baseline(target, fitted, baseline, mae);
  CHECK(got == doctest::Approx(distance(baseline, target, mae) -
                               distance(fitted, target, mae)));
  CHECK(got > 0);
}

TEST_CASE("integer box bookkeeping") {
  IntegerBox box{{"a", "b"}, {1, 1}, {10, 10}};
  CHECK(box.dims() == 2);
  CHECK(box.size() == 100);
  IntegerBox point{{"a"}, {3}, {3}};
  CHECK(point.size() == 1);
}

TEST_CASE("parameter search stays in the box and never repeats") {
  IntegerBox box{{"x", "y", "z"}, {1, 1, 1}, {10, 10, 10}};
  auto objective = [](const std::vector<int>& p) {
    double dx = p[0] - 7, dy = p[1] - 3, dz = p[2] - 9;
    return dx * dx + dy * dy + dz * dz;
  };
  ParamFit fit = construct_params(box, objective, {5, 15, 0}, 2718);
  CHECK(int(fit.log.size()) <= 20);
  CHECK_FALSE(fit.box_exhausted);
  std::map<std::vector<int>, int> seen;
  int init_count = 0;
  for (const auto& e : fit.log) {
    REQUIRE(e.params.size() == 3);
    for (int d = 0; d < 3; ++d) {
      CHECK(e.params[d] >= 1);
      CHECK(e.params[d] <= 10);
    }
    CHECK(++seen[e.params] == 1);
    if (e.phase == "init") ++init_count;
    CHECK(e.objective == doctest::Approx(objective(e.params)));
  }
  CHECK(init_count == 5);
  double best = 1e18;
  for (const auto& e : fit.log) best = std::min(best, e.objective);
  CHECK(fit.best_objective == doctest::Approx(best));
  CHECK(objective(fit.best_params) == doctest::Approx(fit.best_objective));

  ParamFit again = construct_params(box, objective, {5, 15, 0}, 2718);
  CHECK(again.best_params == fit.best_params);
  REQUIRE(again.log.size() == fit.log.size());
  for (std::size_t i = 0; i < fit.log.size(); ++i)
    CHECK(again.log[i].params == fit.log[i].params);
}

TEST_CASE("guided proposals beat blind sampling on a smooth objective") {
  IntegerBox box{{"x", "y"}, {1, 1}, {30, 30}};
  auto objective = [](const std::vector<int>& p) {
    double dx = (p[0] - 24) / 29.0, dy = (p[1] - 6) / 29.0;
    return dx * dx + 2.0 * dy * dy;
  };
  int guided_wins = 0, trials = 12;
  for (int t = 0; t < trials; ++t) {
    ParamFit guided = construct_params(box, objective, {5, 15, 0}, 5000 + t);
    // Random search with the same total budget: init-only evaluations.
    ParamFit blind = construct_params(box, objective, {20, 0, 0}, 5000 + t);
    if (guided.best_objective <= blind.best_objective) ++guided_wins;
  }
  CHECK(guided_wins >= 8);
}

TEST_CASE("a small box is exhausted exactly") {
  IntegerBox box{{"x"}, {1}, {6}};
  auto objective = [](const std::vector<int>& p) {
    return double((p[0] - 4) * (p[0] - 4));
  };
  ParamFit fit = construct_params(box, objective, {20, 20, 0}, 7);
  CHECK(fit.box_exhausted);
  CHECK(int(fit.log.size()) == 6);
  CHECK(fit.best_params == std::vector<int>{4});
  CHECK(fit.best_objective == 0.0);
}

TEST_CASE("wall-clock exhaustion carries the best fit so far") {
  IntegerBox box{{"x", "y"}, {1, 1}, {50, 50}};
  int evals = 0;
  auto objective = [&](const std::vector<int>& p) {
    ++evals;
    // Busy-wait so even the first evaluations overrun the budget.
    volatile double sink = 0;
    for (int i = 0; i < 2000000; ++i) sink = sink + std::sqrt(double(i));
    return double(p[0] + p[1]) + sink * 0;
  };
  ConstructOptions opt;
  opt.init_budget = 5;
  opt.guided_budget = 15;
  opt.time_budget_seconds = 0.005;
  bool threw = false;
  try {
    construct_params(box, objective, opt, 11);
  } catch (const BudgetExhausted& e) {
    threw = true;
    CHECK(e.best_so_far.log.size() >= 1);
    CHECK(e.best_so_far.log.size() < 20);
    CHECK(e.best_so_far.best_params.size() == 2);
    CHECK(std::string(e.what()).find("budget") != std::string::npos);
  }
  CHECK(threw);
  CHECK(evals >= 1);
}

TEST_CASE("prompted construction fills trait slots from box names") {
  PromptSpec tmpl;
  tmpl.preamble = "You are a participant.";
  tmpl.persona = "Efficiency {eff}, selfishness {self}.";

  IntegerBox box{{"eff", "self"}, {1, 1}, {10, 10}};
  std::vector<ResponseDistribution> targets = {dist({0.2, 0.8})};
  DistanceMeasure mae{DistanceKind::kMeanAbsoluteError, std::nullopt};

  std::vector<std::vector<int>> asked;
  ConstructEvaluator evaluator =
      [&](const std::vector<int>& p) -> std::vector<ResponseDistribution> {
    asked.push_back(p);
    // Pretend higher efficiency shifts mass to the second action.
    double hi = p[0] / 10.0;
    return {dist({1.0 - hi, hi})};
  };
  ParamFit fit = construct_params(tmpl, 1, box, targets, mae, evaluator,
                                  {5, 10, 0}, 31);
  CHECK_FALSE(asked.empty());
  CHECK(fit.best_params[0] == 8);  // 0.8 hit exactly
  CHECK(fit.best_objective == doctest::Approx(0.0).epsilon(1e-12));

  // Slots the box cannot fill are rejected up front.
  IntegerBox wrong{{"eff", "other"}, {1, 1}, {10, 10}};
  CHECK_THROWS(construct_params(tmpl, 1, wrong, targets, mae, evaluator,
                                {2, 2, 0}, 31));
}
