#include "gamelab/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gamelab/rng.hpp"
#include "gamelab/special.hpp"

namespace gamelab {

SmoothedModel smooth(const std::vector<double>& probs, double epsilon) {
  if (epsilon < 0 || epsilon >= 1)
    throw std::invalid_argument("epsilon must lie in [0, 1)");
  SmoothedModel out;
  out.epsilon = epsilon;
  std::size_t k = probs.size();
  out.probs.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    out.probs[i] = (1 - epsilon) * probs[i] + epsilon / double(k);
  return out;
}

GameComparison game_llr(const std::string& game_id,
                        const std::vector<int>& responses,
                        const SmoothedModel& model_a, const SmoothedModel& model_b) {
  if (model_a.probs.size() != model_b.probs.size())
    throw std::invalid_argument("models cover different action sets");
  GameComparison out;
  out.game_id = game_id;
  out.m = int(responses.size());
  out.log_terms.reserve(responses.size());
  for (int r : responses) {
    if (r < 0 || r >= int(model_a.probs.size()))
      throw std::out_of_range("response index outside the action set");
    double pa = model_a.probs[r], pb = model_b.probs[r];
    if (pa <= 0 || pb <= 0)
      throw std::domain_error("model assigns zero probability to an observed response");
    out.log_terms.push_back(std::log(pa) - std::log(pb));
  }
  if (out.m == 0) return out;
  out.llr = std::accumulate(out.log_terms.begin(), out.log_terms.end(), 0.0) /
            double(out.m);
  if (out.m > 1) {
    double acc = 0;
    for (double t : out.log_terms) acc += (t - out.llr) * (t - out.llr);
    out.within_var = acc / double(out.m - 1);
  }
  return out;
}

ProportionInterval clopper_pearson(int successes, int n, double level) {
  if (n <= 0 || successes < 0 || successes > n)
    throw std::invalid_argument("invalid binomial counts");
  double alpha = 1 - level;
  ProportionInterval out;
  out.successes = successes;
  out.n = n;
  out.proportion = double(successes) / double(n);
  out.lower = successes == 0
                  ? 0.0
                  : beta_quantile(successes, n - successes + 1, alpha / 2);
  out.upper = successes == n
                  ? 1.0
                  : beta_quantile(successes + 1, n - successes, 1 - alpha / 2);
  return out;
}

double wilcoxon_signed_rank(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values)
    if (x != 0) v.push_back(x);
  int n = int(v.size());
  if (n == 0) throw std::domain_error("signed-rank test needs a nonzero value");

  // Midranks of |v|, doubled so ties stay integral.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(v[a]) < std::abs(v[b]); });
  std::vector<long long> rank2(n);
  std::vector<long long> tie_sizes;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && std::abs(v[order[j]]) == std::abs(v[order[i]])) ++j;
    long long doubled = (long long)(i + 1) + (long long)j;  // 2 * mean rank
    for (int k = i; k < j; ++k) rank2[order[k]] = doubled;
    tie_sizes.push_back(j - i);
    i = j;
  }
  long long w2 = 0, total2 = 0;
  for (int k = 0; k < n; ++k) {
    total2 += rank2[k];
    if (v[k] > 0) w2 += rank2[k];
  }

  if (n <= 25) {
    // Counts of sign patterns per doubled rank sum.
    std::vector<double> count(total2 + 1, 0.0);
    count[0] = 1;
    for (int k = 0; k < n; ++k) {
      for (long long s = total2; s >= rank2[k]; --s)
        count[s] += count[s - rank2[k]];
    }
    double all = std::pow(2.0, n);
    double below = 0, above = 0;
    for (long long s = 0; s <= w2; ++s) below += count[s];
    for (long long s = w2; s <= total2; ++s) above += count[s];
    double p = 2.0 * std::min(below, above) / all;
    return std::min(1.0, p);
  }

  double w = w2 / 2.0;
  double mean = n * (n + 1) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  for (long long t : tie_sizes) var -= double(t * t * t - t) / 48.0;
  if (var <= 0) return 1.0;
  double z = (w - mean);
  z -= z > 0 ? 0.5 : (z < 0 ? -0.5 : 0.0);  // continuity correction
  z /= std::sqrt(var);
  return std::min(1.0, 2.0 * (1.0 - normal_cdf(std::abs(z))));
}

namespace {

double two_sided_count_p(const std::vector<double>& values, double obs,
                         std::uint64_t iterations, Rng* rng) {
  int n = int(values.size());
  double slack = 1e-12 * (std::abs(obs) + 1.0);
  std::uint64_t hits = 0;
  std::uint64_t total = rng ? iterations : (1ull << n);
  for (std::uint64_t it = 0; it < total; ++it) {
    double sum = 0;
    if (rng) {
      std::uint64_t bits = rng->next_u64();
      for (int k = 0; k < n; ++k)
        sum += ((bits >> (k & 63)) & 1) ? values[k] : -values[k];
    } else {
      for (int k = 0; k < n; ++k)
        sum += ((it >> k) & 1) ? values[k] : -values[k];
    }
    if (std::abs(sum / n) >= std::abs(obs) - slack) ++hits;
  }
  if (rng) return double(hits + 1) / double(total + 1);
  return double(hits) / double(total);
}

}  // namespace

double sign_permutation_test(const std::vector<double>& values, int iterations,
                             std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  double obs = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  Rng rng(derive_seed(seed, "stats/sign-permutation", 0));
  // For n > 64 the single-word bit trick breaks; draw per value instead.
  int n = int(values.size());
  if (n > 64) {
    double slack = 1e-12 * (std::abs(obs) + 1.0);
    std::uint64_t hits = 0;
    for (int it = 0; it < iterations; ++it) {
      double sum = 0;
      for (int k = 0; k < n; ++k)
        sum += (rng.next_u64() & 1) ? values[k] : -values[k];
      if (std::abs(sum / n) >= std::abs(obs) - slack) ++hits;
    }
    return double(hits + 1) / double(iterations + 1);
  }
  return two_sided_count_p(values, obs, iterations, &rng);
}

double sign_permutation_exact(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  if (values.size() > 20) throw std::invalid_argument("exact enumeration capped at n = 20");
  double obs = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  return two_sided_count_p(values, obs, 0, nullptr);
}

ComparisonReport aggregate(const std::vector<GameComparison>& comparisons,
                           int bootstrap_draws, std::uint64_t seed,
                           int permutation_iterations) {
  if (comparisons.size() < 2)
    throw std::invalid_argument("aggregate needs at least two games");
  ComparisonReport out;
  int n = int(comparisons.size());
  out.n_games = n;
  std::vector<double> llrs(n);
  for (int i = 0; i < n; ++i) llrs[i] = comparisons[i].llr;
  out.mean = std::accumulate(llrs.begin(), llrs.end(), 0.0) / n;

  double var = 0;
  for (double x : llrs) var += (x - out.mean) * (x - out.mean);
  var /= (n - 1);
  out.between_var = var;
  out.sample_se = std::sqrt(var / n);
  for (const auto& c : comparisons)
    out.within_mean += c.m > 0 ? c.within_var / c.m : 0.0;
  out.within_mean /= n;

  Rng rng(derive_seed(seed, "stats/bootstrap", 0));
  std::vector<double> boot(bootstrap_draws);
  for (int b = 0; b < bootstrap_draws; ++b) {
    double acc = 0;
    for (int i = 0; i < n; ++i) acc += llrs[rng.uniform_int(n)];
    boot[b] = acc / n;
  }
  if (bootstrap_draws > 1) {
    double bm = std::accumulate(boot.begin(), boot.end(), 0.0) / bootstrap_draws;
    double bv = 0;
    for (double x : boot) bv += (x - bm) * (x - bm);
    out.bootstrap_se = std::sqrt(bv / (bootstrap_draws - 1));
    std::sort(boot.begin(), boot.end());
    auto pct = [&](double q) {
      double pos = q * (bootstrap_draws - 1);
      int lo = int(pos);
      int hi = std::min(lo + 1, bootstrap_draws - 1);
      double frac = pos - lo;
      return boot[lo] * (1 - frac) + boot[hi] * frac;
    };
    out.ci_lower = pct(0.025);
    out.ci_upper = pct(0.975);
  }

  int positive = 0;
  for (double x : llrs)
    if (x > 0) ++positive;
  out.best_predictor = clopper_pearson(positive, n);

  bool any_nonzero = false;
  for (double x : llrs) any_nonzero |= (x != 0);
  out.wilcoxon_p = any_nonzero ? wilcoxon_signed_rank(llrs) : 1.0;
  out.permutation_p = sign_permutation_test(llrs, permutation_iterations,
                                            derive_seed(seed, "stats/perm", 0));
  return out;
}

OlsResult ols_robust(const std::vector<double>& y,
                     const std::vector<std::vector<double>>& rows) {
  int n = int(rows.size());
  if (n == 0 || int(y.size()) != n) throw std::invalid_argument("shape mismatch");
  int p = int(rows[0].size());
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    if (int(rows[i].size()) != p) throw std::invalid_argument("ragged design matrix");
    for (int j = 0; j < p; ++j) X(i, j) = rows[i][j];
    Y(i) = y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p) throw std::domain_error("rank-deficient design");
  Eigen::VectorXd beta = qr.solve(Y);
  Eigen::VectorXd resid = Y - X * beta;
  double sse = resid.squaredNorm();
  Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();

  OlsResult out;
  out.n = n;
  out.p = p;
  out.coef.assign(beta.data(), beta.data() + p);
  double s2 = sse / (n - p);
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd xi = X.row(i).transpose();
    meat += resid(i) * resid(i) * xi * xi.transpose();
  }
  Eigen::MatrixXd sandwich = xtx_inv * meat * xtx_inv * (double(n) / (n - p));
  out.robust_se.resize(p);
  out.classical_se.resize(p);
  for (int j = 0; j < p; ++j) {
    out.robust_se[j] = std::sqrt(sandwich(j, j));
    out.classical_se[j] = std::sqrt(s2 * xtx_inv(j, j));
  }
  double ybar = Y.mean();
  double tss = (Y.array() - ybar).matrix().squaredNorm();
  out.r2 = tss > 0 ? 1.0 - sse / tss : 0.0;
  out.adj_r2 = n > p ? 1.0 - (1.0 - out.r2) * double(n - 1) / double(n - p) : 0.0;
  return out;
}

CoverageSummary support_coverage(const std::vector<CoverageInput>& games) {
  CoverageSummary out;
  long long humans = 0, on_argmax = 0, on_top3 = 0, on_positive = 0;
  long long n_games = 0, games_any = 0, games_all = 0;
  for (const auto& g : games) {
    if (g.responses.empty()) continue;
    ++n_games;
    int k = int(g.model.size());
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (g.model[a] != g.model[b]) return g.model[a] > g.model[b];
      return a > b;  // ties toward the higher action
    });
    int argmax = order[0];
    bool any = false, all = true;
    for (int r : g.responses) {
      ++humans;
      if (r == argmax) ++on_argmax;
      for (int t = 0; t < std::min(3, k); ++t)
        if (order[t] == r) {
          ++on_top3;
          break;
        }
      bool in_support = r >= 0 && r < k && g.model[r] > 0;
      if (in_support) ++on_positive;
      any |= in_support;
      all &= in_support;
    }
    if (any) ++games_any;
    if (all) ++games_all;
  }
  if (humans > 0) {
    out.share_argmax = double(on_argmax) / humans;
    out.share_top3 = double(on_top3) / humans;
    out.share_positive = double(on_positive) / humans;
  }
  if (n_games > 0) {
    out.games_any = double(games_any) / n_games;
    out.games_all = double(games_all) / n_games;
  }
  return out;
}

}  // namespace gamelab
