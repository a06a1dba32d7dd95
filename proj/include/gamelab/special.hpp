#pragma once

namespace gamelab {

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Quantile of the Beta(a, b) distribution: smallest x with I_x(a, b) >= p.
double beta_quantile(double a, double b, double p);

// Standard normal CDF.
double normal_cdf(double z);

}  // namespace gamelab
