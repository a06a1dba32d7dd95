#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gamelab/agents.hpp"

namespace gamelab {

enum class DistanceKind {
  kForwardKl,
  kCdfAbsolute,
  kMeanAbsoluteError,
  kEarthMover1D,
};

// Forward KL treats the first argument as the reference distribution. A zero
// model cell under positive reference mass is an error unless `smoothing`
// blends the model with uniform noise first.
struct DistanceMeasure {
  DistanceKind kind = DistanceKind::kForwardKl;
  std::optional<double> smoothing;
};

const char* measure_id(DistanceKind kind);
DistanceMeasure measure_from_id(const std::string& id);

double distance(const std::vector<double>& p, const std::vector<double>& q,
                const DistanceMeasure& measure);
double distance(const ResponseDistribution& p, const ResponseDistribution& q,
                const DistanceMeasure& measure);

struct MixtureFit {
  std::vector<double> weights;
  double objective = 0;
  std::vector<double> trace;  // objective after each accepted optimizer step
  int restarts = 0;
  std::uint64_t seed = 0;
};

// Minimizes d(target, sum_c w_c candidate_c) over the weight simplex:
// projected-gradient descent from seeded random starts (uniform and vertex
// starts always included), then pairwise line-search polish. Deterministic
// for a fixed seed.
MixtureFit select_mixture(const std::vector<ResponseDistribution>& candidates,
                          const ResponseDistribution& target,
                          const DistanceMeasure& measure, int restarts,
                          std::uint64_t seed);

// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::vector<double> v);

struct IntegerBox {
  std::vector<std::string> names;
  std::vector<int> lower;  // inclusive
  std::vector<int> upper;  // inclusive

  int dims() const { return int(lower.size()); }
  std::uint64_t size() const;  // number of lattice points, saturating
};

struct ParamEvaluation {
  std::vector<int> params;
  double objective = 0;
  std::string phase;  // "init" or "guided"
};

struct ParamFit {
  std::vector<int> best_params;
  double best_objective = 0;
  std::vector<ParamEvaluation> log;  // every evaluation, in order, no repeats
  bool box_exhausted = false;
};

class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted(const std::string& what, ParamFit partial)
      : std::runtime_error(what), best_so_far(std::move(partial)) {}
  ParamFit best_so_far;
};

using ConstructObjective = std::function<double(const std::vector<int>&)>;
using ConstructEvaluator =
    std::function<std::vector<ResponseDistribution>(const std::vector<int>&)>;

struct ConstructOptions {
  int init_budget = 5;
  int guided_budget = 15;
  double time_budget_seconds = 0;  // 0 means unlimited
};

// Budgeted derivative-free minimization over an integer box: seeded
// Latin-hypercube initialization, then sequential proposals from a Gaussian
// process (Matern-5/2, expected improvement) with nearest-integer projection
// and duplicate rejection. Throws BudgetExhausted if the wall-clock budget
// runs out mid-search; stops early (flagged) if the box itself is exhausted.
ParamFit construct_params(const IntegerBox& box,
                          const ConstructObjective& objective,
                          const ConstructOptions& options, std::uint64_t seed);

// Convenience wrapper: the evaluator returns one distribution per training
// setting and the objective is the mean distance to the targets. The prompt
// template documents the slot structure; its trait slots must be fillable
// from the box dimension names.
ParamFit construct_params(const PromptSpec& prompt_template, int slots,
                          const IntegerBox& box,
                          const std::vector<ResponseDistribution>& targets,
                          const DistanceMeasure& measure,
                          const ConstructEvaluator& evaluator,
                          const ConstructOptions& options, std::uint64_t seed);

// d(target, baseline) - d(target, fitted); positive when the fit wins.
double improvement_over_baseline(const ResponseDistribution& target,
                                 const ResponseDistribution& fitted,
                                 const ResponseDistribution& baseline,
                                 const DistanceMeasure& measure);

}  // namespace gamelab
