#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gamelab {

// P_tilde(a) = (1 - eps) P(a) + eps / K over the action set.
struct SmoothedModel {
  std::vector<double> probs;
  double epsilon = 0;
};

SmoothedModel smooth(const std::vector<double>& probs, double epsilon);

// Per-game log-likelihood ratio between two smoothed models on observed
// responses (indices into the action set). Positive favors model A.
struct GameComparison {
  std::string game_id;
  std::vector<double> log_terms;
  double llr = 0;
  double within_var = 0;  // sample variance of log terms, 0 when m = 1
  int m = 0;
};

GameComparison game_llr(const std::string& game_id,
                        const std::vector<int>& responses,
                        const SmoothedModel& model_a, const SmoothedModel& model_b);

struct ProportionInterval {
  double proportion = 0;
  double lower = 0;
  double upper = 1;
  int successes = 0;
  int n = 0;
};

// Exact (Clopper-Pearson) equal-tailed binomial interval via beta quantiles.
ProportionInterval clopper_pearson(int successes, int n, double level = 0.95);

// Two-sided signed-rank test. Exact over sign patterns (midranks condition on
// observed ties) for n <= 25 after zero removal; normal approximation with
// tie and continuity corrections above. Throws if every value is zero.
double wilcoxon_signed_rank(const std::vector<double>& values);

// Two-sided Monte-Carlo sign-flip test of mean 0 with add-one correction.
double sign_permutation_test(const std::vector<double>& values, int iterations,
                             std::uint64_t seed);

// Exhaustive version of the above (2^n flips); n capped at 20.
double sign_permutation_exact(const std::vector<double>& values);

struct ComparisonReport {
  int n_games = 0;
  double mean = 0;
  double bootstrap_se = 0;
  double ci_lower = 0, ci_upper = 0;  // percentile bootstrap
  double sample_se = 0;               // sqrt(var(llr) / n)
  double between_var = 0;             // Var over games of llr
  double within_mean = 0;             // mean over games of within_var / m
  ProportionInterval best_predictor;  // share with llr > 0, ties count against
  double wilcoxon_p = 1;
  double permutation_p = 1;
};

ComparisonReport aggregate(const std::vector<GameComparison>& comparisons,
                           int bootstrap_draws, std::uint64_t seed,
                           int permutation_iterations = 100000);

// Least squares with heteroskedasticity-robust (HC1) standard errors.
struct OlsResult {
  std::vector<double> coef;
  std::vector<double> robust_se;
  std::vector<double> classical_se;
  double r2 = 0, adj_r2 = 0;
  int n = 0, p = 0;
};

OlsResult ols_robust(const std::vector<double>& y,
                     const std::vector<std::vector<double>>& rows);

// One game's worth of input to the coverage summary: observed response
// indices plus the model's unsmoothed distribution over the same actions.
struct CoverageInput {
  std::vector<int> responses;
  std::vector<double> model;
};

struct CoverageSummary {
  double share_argmax = 0;    // humans on the model's max-probability action
  double share_top3 = 0;      // humans on the model's top-3 actions
  double share_positive = 0;  // humans on any positive-probability action
  double games_any = 0;       // games where some human is in support
  double games_all = 0;       // games where every human is in support
};

// Argmax and top-3 ties break toward the higher action index.
CoverageSummary support_coverage(const std::vector<CoverageInput>& games);

}  // namespace gamelab
