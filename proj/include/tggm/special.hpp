#pragma once

namespace tggm {

// log Gamma_p(a), the multivariate gamma function; requires a > (p-1)/2.
double log_multivariate_gamma(int p, double a);

double log_choose(int n, int k);

// Regularized lower incomplete gamma P(a, x); complement is 1 - value.
double gamma_cdf_regularized(double a, double x);

// CDF and quantile of Gamma(shape, rate).
double gamma_cdf(double x, double shape, double rate);
double gamma_quantile(double prob, double shape, double rate);

// log |s(n, k)|, unsigned Stirling numbers of the first kind. Rows cached.
double log_stirling1(int n, int k);

double log_sum_exp(double a, double b);

}  // namespace tggm
