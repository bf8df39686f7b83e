// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "cdp/errors.hpp"

namespace cdp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum_i exp(x_i)), guarded against empty input and -inf entries.
inline double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return kNegInf;
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log of the rising factorial a(a+1)...(a+n-1).
inline double log_rising_factorial(double a, int n) {
  return std::lgamma(a + n) - std::lgamma(a);
}

inline double normal_cdf(double x, double mean, double variance) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

inline double normal_log_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * M_PI * variance) + d * d / variance);
}

inline double normal_pdf(double x, double mean, double variance) {
  return std::exp(normal_log_pdf(x, mean, variance));
}

// Regularized lower incomplete gamma P(a, x), series for x < a+1 and
// continued fraction otherwise (Lentz's method).
inline double regularized_gamma_p(double a, double x) {
  if (a <= 0.0) throw domain_error("regularized_gamma_p: a must be positive");
  if (x < 0.0) throw domain_error("regularized_gamma_p: x must be non-negative");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // continued fraction for Q(a,x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

inline double gamma_cdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(shape, rate * x);
}

inline double erlang_log_pdf(int k, double rate, double x) {
  if (x < 0.0) return kNegInf;
  return k * std::log(rate) + (k - 1) * std::log(x) - rate * x - std::lgamma(k);
}

// Student-t log density with df nu, location loc and scale s (s^2 the
// squared scale). The conjugate NIG predictive lands here.
inline double student_t_log_pdf(double x, double nu, double loc, double scale2) {
  const double d2 = (x - loc) * (x - loc) / scale2;
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * M_PI * scale2) -
         0.5 * (nu + 1.0) * std::log1p(d2 / nu);
}

}  // namespace cdp
