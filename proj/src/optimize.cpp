#include "gamelab/optimize.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "gamelab/rng.hpp"
#include "gamelab/special.hpp"

namespace gamelab {

const char* measure_id(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::kForwardKl: return "forward-kl";
    case DistanceKind::kCdfAbsolute: return "cdf-abs";
    case DistanceKind::kMeanAbsoluteError: return "mae";
    case DistanceKind::kEarthMover1D: return "emd";
  }
  return "?";
}

DistanceMeasure measure_from_id(const std::string& id) {
  DistanceMeasure m;
  if (id == "forward-kl") m.kind = DistanceKind::kForwardKl;
  else if (id == "cdf-abs") m.kind = DistanceKind::kCdfAbsolute;
  else if (id == "mae") m.kind = DistanceKind::kMeanAbsoluteError;
  else if (id == "emd") m.kind = DistanceKind::kEarthMover1D;
  else throw std::invalid_argument("unknown distance measure " + id);
  return m;
}

double distance(const std::vector<double>& p, const std::vector<double>& q,
                const DistanceMeasure& measure) {
  if (p.size() != q.size() || p.empty())
    throw std::invalid_argument("distance needs matching nonempty supports");
  std::size_t k = p.size();
  switch (measure.kind) {
    case DistanceKind::kForwardKl: {
      std::vector<double> qq = q;
      if (measure.smoothing) {
        double eps = *measure.smoothing;
        if (eps < 0 || eps >= 1)
          throw std::invalid_argument("smoothing must lie in [0,1)");
        for (double& v : qq) v = (1 - eps) * v + eps / double(k);
      }
      double total = 0;
      for (std::size_t i = 0; i < k; ++i) {
        if (p[i] <= 0) continue;
        if (qq[i] <= 0)
          throw std::domain_error(
              "support violation: model assigns zero probability to an "
              "observed response");
        total += p[i] * std::log(p[i] / qq[i]);
      }
      return std::max(total, 0.0);
    }
    case DistanceKind::kCdfAbsolute:
    case DistanceKind::kEarthMover1D: {
      double total = 0, cp = 0, cq = 0;
      for (std::size_t i = 0; i < k; ++i) {
        cp += p[i];
        cq += q[i];
        total += std::abs(cp - cq);
      }
      return total;
    }
    case DistanceKind::kMeanAbsoluteError: {
      double total = 0;
      for (std::size_t i = 0; i < k; ++i) total += std::abs(p[i] - q[i]);
      return total / double(k);
    }
  }
  throw std::logic_error("unknown distance kind");
}

double distance(const ResponseDistribution& p, const ResponseDistribution& q,
                const DistanceMeasure& measure) {
  return distance(p.probs, q.probs, measure);
}

std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0;
  double theta = 0;
  int rho = -1;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cssv += u[j];
    double t = (cssv - 1.0) / double(j + 1);
    if (u[j] - t > 0) {
      rho = int(j);
      theta = t;
    }
  }
  (void)rho;
  for (double& x : v) x = std::max(x - theta, 0.0);
  return v;
}

namespace {

struct MixtureProblem {
  const std::vector<std::vector<double>>* candidates;  // probs per candidate
  const std::vector<double>* target;
  DistanceMeasure measure;
  std::size_t k;

  std::vector<double> mix(const std::vector<double>& w) const {
    std::vector<double> m(k, 0.0);
    for (std::size_t c = 0; c < candidates->size(); ++c) {
      double wc = w[c];
      if (wc == 0) continue;
      const auto& q = (*candidates)[c];
      for (std::size_t i = 0; i < k; ++i) m[i] += wc * q[i];
    }
    for (double& x : m)
      if (x < 0 && x > -1e-14) x = 0;
    return m;
  }

  double value(const std::vector<double>& w) const {
    return distance(*target, mix(w), measure);
  }

  double value_of_mix(std::vector<double> m) const {
    for (double& x : m)
      if (x < 0 && x > -1e-14) x = 0;
    return distance(*target, m, measure);
  }

  // Subgradient of the objective with respect to the weights.
  std::vector<double> gradient(const std::vector<double>& w) const {
    std::vector<double> m = mix(w);
    std::size_t n = candidates->size();
    std::vector<double> dm(k, 0.0);
    const auto& p = *target;
    switch (measure.kind) {
      case DistanceKind::kForwardKl: {
        double scale = 1.0;
        std::vector<double> ms = m;
        if (measure.smoothing) {
          double eps = *measure.smoothing;
          scale = 1 - eps;
          for (double& x : ms) x = (1 - eps) * x + eps / double(k);
        }
        for (std::size_t i = 0; i < k; ++i)
          dm[i] = (p[i] > 0 && ms[i] > 0) ? -scale * p[i] / ms[i] : 0.0;
        break;
      }
      case DistanceKind::kCdfAbsolute:
      case DistanceKind::kEarthMover1D: {
        std::vector<double> sign_suffix(k + 1, 0.0);
        double cp = 0, cm = 0;
        std::vector<double> signs(k);
        for (std::size_t i = 0; i < k; ++i) {
          cp += p[i];
          cm += m[i];
          double d = cm - cp;
          signs[i] = (d > 0) - (d < 0);
        }
        for (int i = int(k) - 1; i >= 0; --i)
          sign_suffix[i] = sign_suffix[i + 1] + signs[i];
        for (std::size_t i = 0; i < k; ++i) dm[i] = sign_suffix[i];
        break;
      }
      case DistanceKind::kMeanAbsoluteError: {
        for (std::size_t i = 0; i < k; ++i) {
          double d = m[i] - p[i];
          dm[i] = ((d > 0) - (d < 0)) / double(k);
        }
        break;
      }
    }
    std::vector<double> g(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      const auto& q = (*candidates)[c];
      double acc = 0;
      for (std::size_t i = 0; i < k; ++i) acc += dm[i] * q[i];
      g[c] = acc;
    }
    return g;
  }
};

// Projected-gradient descent with backtracking; only improving steps are
// taken so the objective trace is nonincreasing.
double descend(const MixtureProblem& prob, std::vector<double>& w,
               std::vector<double>* trace) {
  double obj = prob.value(w);
  if (trace) trace->push_back(obj);
  double step = 1.0;
  for (int iter = 0; iter < 400; ++iter) {
    std::vector<double> g = prob.gradient(w);
    bool accepted = false;
    double t = step;
    for (int bt = 0; bt < 50; ++bt) {
      std::vector<double> w2(w.size());
      for (std::size_t c = 0; c < w.size(); ++c) w2[c] = w[c] - t * g[c];
      w2 = project_to_simplex(std::move(w2));
      double o2 = prob.value(w2);
      if (o2 < obj - 1e-15) {
        w = std::move(w2);
        obj = o2;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    if (trace) trace->push_back(obj);
    step = std::min(t * 2.0, 64.0);
  }
  return obj;
}

// Exact line polish: for every ordered candidate pair, move mass along the
// segment and ternary-search the (convex) slice.
double polish(const MixtureProblem& prob, std::vector<double>& w,
              std::vector<double>* trace) {
  std::size_t n = w.size();
  double obj = prob.value(w);
  std::vector<double> m = prob.mix(w);
  for (int sweep = 0; sweep < 300; ++sweep) {
    bool improved = false;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        // t > 0 moves mass from a to b.
        double lo = -w[b], hi = w[a];
        if (hi - lo < 1e-15) continue;
        const auto& qa = (*prob.candidates)[a];
        const auto& qb = (*prob.candidates)[b];
        auto value_at = [&](double t) {
          std::vector<double> mt(prob.k);
          for (std::size_t i = 0; i < prob.k; ++i)
            mt[i] = m[i] + t * (qb[i] - qa[i]);
          return prob.value_of_mix(std::move(mt));
        };
        double l = lo, h = hi;
        for (int it = 0; it < 80; ++it) {
          double m1 = l + (h - l) / 3.0, m2 = h - (h - l) / 3.0;
          if (value_at(m1) <= value_at(m2)) h = m2;
          else l = m1;
        }
        double t = 0.5 * (l + h);
        for (double probe : {lo, 0.0, hi, t}) {
          if (probe < lo || probe > hi) continue;
          if (value_at(probe) < value_at(t)) t = probe;
        }
        double vt = value_at(t);
        if (vt < obj - 1e-14) {
          for (std::size_t i = 0; i < prob.k; ++i) m[i] += t * (qb[i] - qa[i]);
          w[a] -= t;
          w[b] += t;
          if (w[a] < 0) w[a] = 0;
          if (w[b] < 0) w[b] = 0;
          obj = vt;
          improved = true;
        }
      }
    }
    if (improved && trace) trace->push_back(obj);
    if (!improved) break;
  }
  return obj;
}

}  // namespace

MixtureFit select_mixture(const std::vector<ResponseDistribution>& candidates,
                          const ResponseDistribution& target,
                          const DistanceMeasure& measure, int restarts,
                          std::uint64_t seed) {
  if (candidates.empty()) throw std::invalid_argument("no candidates");
  std::size_t n = candidates.size();
  std::size_t k = target.probs.size();
  std::vector<std::vector<double>> cand(n);
  for (std::size_t c = 0; c < n; ++c) {
    if (candidates[c].probs.size() != k)
      throw std::invalid_argument("candidate support differs from target");
    cand[c] = candidates[c].probs;
  }
  MixtureProblem prob{&cand, &target.probs, measure, k};

  MixtureFit fit;
  fit.restarts = restarts;
  fit.seed = seed;
  if (n == 1) {
    fit.weights = {1.0};
    fit.objective = prob.value(fit.weights);
    fit.trace = {fit.objective};
    return fit;
  }

  std::vector<std::vector<double>> starts;
  starts.emplace_back(n, 1.0 / double(n));
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<double> v(n, 0.0);
    v[c] = 1.0;
    starts.push_back(std::move(v));
  }
  for (int r = 0; r < std::max(restarts, 0); ++r) {
    Rng rng(derive_seed(seed, "optimize/select/start", std::uint64_t(r)));
    std::vector<double> v(n);
    double total = 0;
    for (std::size_t c = 0; c < n; ++c) {
      v[c] = -std::log(std::max(rng.uniform01(), 1e-300));
      total += v[c];
    }
    for (double& x : v) x /= total;
    starts.push_back(std::move(v));
  }

  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<double> best_w;
  std::vector<double> best_trace;
  for (auto& start : starts) {
    std::vector<double> w = start;
    std::vector<double> trace;
    descend(prob, w, &trace);
    double obj = polish(prob, w, &trace);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_trace = std::move(trace);
    }
  }

  double wsum = std::accumulate(best_w.begin(), best_w.end(), 0.0);
  for (double& x : best_w) x /= wsum;
  fit.weights = std::move(best_w);
  fit.objective = best_obj;
  fit.trace = std::move(best_trace);
  return fit;
}

std::uint64_t IntegerBox::size() const {
  std::uint64_t total = 1;
  for (int d = 0; d < dims(); ++d) {
    if (upper[d] < lower[d]) return 0;
    std::uint64_t range = std::uint64_t(upper[d] - lower[d]) + 1;
    if (total > std::numeric_limits<std::uint64_t>::max() / range)
      return std::numeric_limits<std::uint64_t>::max();
    total *= range;
  }
  return total;
}

namespace {

double matern52(double r) {
  double s = std::sqrt(5.0) * r;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

struct GpSurrogate {
  Eigen::MatrixXd x;  // normalized coordinates, one row per evaluation
  Eigen::VectorXd alpha;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double y_mean = 0, y_std = 1;
  double lengthscale = 0.3;

  void fit(const std::vector<std::vector<double>>& points,
           const std::vector<double>& values) {
    int m = int(points.size());
    int d = int(points[0].size());
    x.resize(m, d);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j) x(i, j) = points[i][j];
    Eigen::VectorXd y(m);
    y_mean = std::accumulate(values.begin(), values.end(), 0.0) / m;
    double var = 0;
    for (double v : values) var += (v - y_mean) * (v - y_mean);
    y_std = std::sqrt(var / std::max(m - 1, 1));
    if (y_std < 1e-12) y_std = 1.0;
    for (int i = 0; i < m; ++i) y(i) = (values[i] - y_mean) / y_std;
    Eigen::MatrixXd kmat(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j <= i; ++j) {
        double r = (x.row(i) - x.row(j)).norm() / lengthscale;
        double v = matern52(r);
        kmat(i, j) = v;
        kmat(j, i) = v;
      }
    kmat.diagonal().array() += 1e-6;
    llt.compute(kmat);
    alpha = llt.solve(y);
  }

  void predict(const std::vector<double>& point, double* mu, double* sigma) const {
    int m = int(x.rows());
    Eigen::VectorXd kstar(m);
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd p(x.cols());
      for (int j = 0; j < x.cols(); ++j) p(j) = point[j];
      kstar(i) = matern52((x.row(i).transpose() - p).norm() / lengthscale);
    }
    *mu = kstar.dot(alpha) * y_std + y_mean;
    Eigen::VectorXd v = llt.matrixL().solve(kstar);
    double var = 1.0 + 1e-6 - v.squaredNorm();
    *sigma = std::sqrt(std::max(var, 1e-12)) * y_std;
  }
};

double expected_improvement(double mu, double sigma, double best) {
  if (sigma <= 0) return 0;
  double xi = 0.01;
  double z = (best - mu - xi) / sigma;
  double pdf = std::exp(-0.5 * z * z) / 2.5066282746310002;
  return (best - mu - xi) * normal_cdf(z) + sigma * pdf;
}

std::vector<double> normalize_point(const IntegerBox& box,
                                    const std::vector<int>& p) {
  std::vector<double> out(p.size());
  for (std::size_t d = 0; d < p.size(); ++d) {
    int range = box.upper[d] - box.lower[d];
    out[d] = range == 0 ? 0.5 : double(p[d] - box.lower[d]) / double(range);
  }
  return out;
}

void enumerate_box(const IntegerBox& box,
                   const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> point = box.lower;
  int d = box.dims();
  while (true) {
    fn(point);
    int i = d - 1;
    while (i >= 0) {
      if (point[i] < box.upper[i]) {
        ++point[i];
        break;
      }
      point[i] = box.lower[i];
      --i;
    }
    if (i < 0) return;
  }
}

}  // namespace

ParamFit construct_params(const IntegerBox& box,
                          const ConstructObjective& objective,
                          const ConstructOptions& options, std::uint64_t seed) {
  int d = box.dims();
  if (d < 1) throw std::invalid_argument("empty parameter box");
  for (int i = 0; i < d; ++i)
    if (box.upper[i] < box.lower[i])
      throw std::invalid_argument("inverted box range");
  if (options.init_budget < 1)
    throw std::invalid_argument("need at least one initial evaluation");

  auto start_time = std::chrono::steady_clock::now();
  auto out_of_time = [&]() {
    if (options.time_budget_seconds <= 0) return false;
    std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start_time;
    return elapsed.count() > options.time_budget_seconds;
  };

  ParamFit fit;
  fit.best_objective = std::numeric_limits<double>::infinity();
  std::set<std::vector<int>> seen;
  std::uint64_t box_size = box.size();

  auto evaluate = [&](const std::vector<int>& point, const char* phase) {
    double value = objective(point);
    fit.log.push_back({point, value, phase});
    seen.insert(point);
    if (value < fit.best_objective) {
      fit.best_objective = value;
      fit.best_params = point;
    }
  };

  // Finds any not-yet-evaluated lattice point, or nullopt if the box is done.
  auto find_unseen = [&]() -> std::optional<std::vector<int>> {
    if (seen.size() >= box_size) return std::nullopt;
    std::optional<std::vector<int>> found;
    if (box_size <= 65536) {
      enumerate_box(box, [&](const std::vector<int>& p) {
        if (!found && !seen.count(p)) found = p;
      });
    }
    return found;
  };

  // Latin-hypercube initialization over the integer box.
  {
    Rng rng(derive_seed(seed, "optimize/construct/init", 0));
    int m = int(std::min<std::uint64_t>(options.init_budget, box_size));
    std::vector<std::vector<int>> strata(d, std::vector<int>(m));
    for (int dim = 0; dim < d; ++dim) {
      std::vector<std::size_t> perm = rng.permutation(std::size_t(m));
      for (int i = 0; i < m; ++i) strata[dim][i] = int(perm[i]);
    }
    for (int i = 0; i < m; ++i) {
      if (out_of_time()) throw BudgetExhausted("time budget exhausted", fit);
      std::vector<int> point(d);
      for (int dim = 0; dim < d; ++dim) {
        double width = double(box.upper[dim] - box.lower[dim] + 1) / m;
        double u = (strata[dim][i] + rng.uniform01()) * width;
        point[dim] =
            std::min(box.lower[dim] + int(u), box.upper[dim]);
      }
      int tries = 0;
      while (seen.count(point) && tries < 256) {
        for (int dim = 0; dim < d; ++dim)
          point[dim] = box.lower[dim] +
                       int(rng.uniform_int(
                           std::uint64_t(box.upper[dim] - box.lower[dim]) + 1));
        ++tries;
      }
      if (seen.count(point)) {
        auto any = find_unseen();
        if (!any) {
          fit.box_exhausted = true;
          break;
        }
        point = *any;
      }
      evaluate(point, "init");
    }
  }

  // Guided phase: GP posterior over normalized coordinates, expected
  // improvement over integer candidates.
  for (int step = 0; step < options.guided_budget; ++step) {
    if (seen.size() >= box_size) {
      fit.box_exhausted = true;
      break;
    }
    if (out_of_time()) throw BudgetExhausted("time budget exhausted", fit);

    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    xs.reserve(fit.log.size());
    for (const auto& rec : fit.log) {
      xs.push_back(normalize_point(box, rec.params));
      ys.push_back(rec.objective);
    }
    GpSurrogate gp;
    gp.fit(xs, ys);
    double y_best = fit.best_objective;

    std::vector<std::vector<int>> pool;
    if (box_size <= 4096) {
      enumerate_box(box, [&](const std::vector<int>& p) {
        if (!seen.count(p)) pool.push_back(p);
      });
    } else {
      Rng rng(derive_seed(seed, "optimize/construct/propose",
                          std::uint64_t(step)));
      std::set<std::vector<int>> drawn;
      for (int i = 0; i < 4096; ++i) {
        std::vector<int> p(d);
        for (int dim = 0; dim < d; ++dim)
          p[dim] = box.lower[dim] +
                   int(rng.uniform_int(
                       std::uint64_t(box.upper[dim] - box.lower[dim]) + 1));
        if (!seen.count(p)) drawn.insert(std::move(p));
      }
      for (int i = 0; i < 256; ++i) {
        std::vector<int> p = fit.best_params;
        for (int dim = 0; dim < d; ++dim) {
          int delta = int(rng.uniform_int(3)) - 1;
          p[dim] = std::clamp(p[dim] + delta, box.lower[dim], box.upper[dim]);
        }
        if (!seen.count(p)) drawn.insert(std::move(p));
      }
      pool.assign(drawn.begin(), drawn.end());
    }
    if (pool.empty()) {
      auto any = find_unseen();
      if (!any) {
        fit.box_exhausted = true;
        break;
      }
      pool.push_back(*any);
    }

    double best_ei = -1;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      double mu, sigma;
      gp.predict(normalize_point(box, pool[i]), &mu, &sigma);
      double ei = expected_improvement(mu, sigma, y_best);
      if (ei > best_ei) {
        best_ei = ei;
        best_idx = i;
      }
    }
    evaluate(pool[best_idx], "guided");
  }

  return fit;
}

ParamFit construct_params(const PromptSpec& prompt_template, int slots,
                          const IntegerBox& box,
                          const std::vector<ResponseDistribution>& targets,
                          const DistanceMeasure& measure,
                          const ConstructEvaluator& evaluator,
                          const ConstructOptions& options, std::uint64_t seed) {
  if (slots < 1) throw std::invalid_argument("need at least one agent slot");
  if (box.dims() % slots != 0)
    throw std::invalid_argument("box dimensions must split evenly across slots");
  if (targets.empty()) throw std::invalid_argument("no target distributions");
  const std::string& body = prompt_template.persona;
  for (std::size_t open = body.find('{'); open != std::string::npos;
       open = body.find('{', open + 1)) {
    std::size_t close = body.find('}', open + 1);
    if (close == std::string::npos) break;
    std::string slot = body.substr(open + 1, close - open - 1);
    bool covered = prompt_template.traits.count(slot) > 0;
    for (const std::string& name : box.names) covered |= (name == slot);
    if (!covered)
      throw std::invalid_argument("prompt slot {" + slot +
                                  "} has no box dimension");
  }
  ConstructObjective objective = [&](const std::vector<int>& params) {
    std::vector<ResponseDistribution> predicted = evaluator(params);
    if (predicted.size() != targets.size())
      throw std::runtime_error("evaluator returned wrong number of settings");
    double total = 0;
    for (std::size_t s = 0; s < targets.size(); ++s)
      total += distance(targets[s], predicted[s], measure);
    return total / double(targets.size());
  };
  return construct_params(box, objective, options, seed);
}

double improvement_over_baseline(const ResponseDistribution& target,
                                 const ResponseDistribution& fitted,
                                 const ResponseDistribution& baseline,
                                 const DistanceMeasure& measure) {
  return distance(target, baseline, measure) - distance(target, fitted, measure);
}

}  // namespace gamelab
