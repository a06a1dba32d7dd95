#include "gamelab/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gamelab {

namespace {

// Overflow-safe softmax of lambda * u.
void softmax(const std::vector<double>& u, double lambda, std::vector<double>& out) {
  double top = -1e300;
  for (double v : u) top = std::max(top, lambda * v);
  double sum = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = std::exp(lambda * u[i] - top);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
}

void matvec(const SymmetricGame& g, const std::vector<double>& p,
            std::vector<double>& out) {
  int n = g.num_actions();
  for (int i = 0; i < n; ++i) {
    double acc = 0;
    for (int j = 0; j < n; ++j) acc += double(g.at(i, j)) * p[j];
    out[i] = acc;
  }
}

// Damped Picard iteration for the logit response fixed point at (alpha, lambda).
// `base` holds the payoff of each action against the prior. Returns the
// fixed-point residual achieved.
double solve_point(const SymmetricGame& g, const std::vector<double>& base,
                   double alpha, double lambda, int max_iters, double tol,
                   std::vector<double>& x, std::vector<double>& y) {
  int n = g.num_actions();
  std::vector<double> ux(n), uy(n), nx(n), ny(n), ay(n), ax(n);
  double eta = 1.0;
  double prev_res = 1e300;
  double res = 1e300;
  for (int it = 0; it < max_iters; ++it) {
    matvec(g, y, ay);
    matvec(g, x, ax);
    for (int i = 0; i < n; ++i) {
      ux[i] = (1 - alpha) * base[i] + alpha * ay[i];
      uy[i] = (1 - alpha) * base[i] + alpha * ax[i];
    }
    softmax(ux, lambda, nx);
    softmax(uy, lambda, ny);
    res = 0;
    for (int i = 0; i < n; ++i) {
      res = std::max(res, std::abs(nx[i] - x[i]));
      res = std::max(res, std::abs(ny[i] - y[i]));
    }
    if (res < tol) {
      x = nx;
      y = ny;
      return res;
    }
    if (res > prev_res)
      eta = std::max(0.05, eta * 0.5);
    else
      eta = std::min(1.0, eta * 1.05);
    prev_res = res;
    for (int i = 0; i < n; ++i) {
      x[i] += eta * (nx[i] - x[i]);
      y[i] += eta * (ny[i] - y[i]);
    }
  }
  return res;
}

}  // namespace

TraceResult logit_trace(const SymmetricGame& g, const std::vector<double>& prior,
                        const TraceOptions& opt) {
  int n = g.num_actions();
  if (int(prior.size()) != n)
    throw std::invalid_argument("prior length does not match game");
  TraceResult res;
  res.row = prior;
  res.col = prior;
  if (n == 1) {
    res.row = {1.0};
    res.col = {1.0};
    res.converged = true;
    return res;
  }

  std::vector<double> base(n);
  matvec(g, prior, base);

  int steps = std::max(1, opt.alpha_steps);
  double shrink = std::pow(1e-4, 1.0 / double(steps));
  double denom = 1.0 - std::pow(shrink, double(steps));
  for (int k = 0; k <= steps; ++k) {
    double alpha =
        k == steps ? 1.0 : (1.0 - std::pow(shrink, double(k))) / denom;
    double t = double(k) / double(steps);
    double lambda = opt.lambda_start * std::pow(opt.lambda_end / opt.lambda_start, t);
    double got = solve_point(g, base, alpha, lambda, opt.max_inner_iterations,
                             opt.tolerance, res.row, res.col);
    // One retry with a bigger budget before declaring the step lost. A loose
    // interior step is tolerable; the endpoint is not.
    if (got >= opt.tolerance) {
      got = solve_point(g, base, alpha, lambda, opt.max_inner_iterations * 4,
                        opt.tolerance, res.row, res.col);
    }
    ++res.steps_taken;
    if (k == steps && got >= std::sqrt(opt.tolerance)) {
      res.converged = false;
      return res;
    }
  }
  res.converged = true;
  return res;
}

}  // namespace gamelab
