#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace dcop {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double norm_cdf(double x);
double norm_quantile(double p);
inline double norm_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }
inline double norm_pdf(double x) { return std::exp(norm_log_pdf(x)); }

double digamma(double x);
double trigamma(double x);

// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

double log_sum_exp(std::span<const double> xs);

// log(1 - exp(-x)) for x > 0.
inline double log1mexp(double x) {
  return x < std::numbers::ln2 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x));
}

}  // namespace dcop
