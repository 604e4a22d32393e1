#pragma once

#include <algorithm>
#include <cmath>

#include "toruslab/rational.hpp"

namespace toruslab {

inline double log_binomial_coeff(long n, long k) {
  return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
         std::lgamma(double(n - k) + 1.0);
}

// Sum of pmf(k) * w(k) over Bin(d, eps), for weights with w(0) = 0.  Starts
// at the pmf mode and recurs outward by pmf ratios, so nothing underflows
// even at d = 2^20; terms are cut 22 decades below the largest one seen.
template <class Weight>
double binom_weighted_sum(double eps, long d, Weight&& w) {
  long k0 = long(std::floor((double(d) + 1.0) * eps));
  k0 = std::clamp(k0, 1L, d);
  const double logpmf0 = log_binomial_coeff(d, k0) + double(k0) * std::log(eps) +
                         double(d - k0) * std::log1p(-eps);
  const double pmf0 = std::exp(logpmf0);
  const double r = eps / (1.0 - eps);

  double acc = pmf0 * w(k0);
  double peak = acc;
  double pmf = pmf0;
  for (long k = k0; k < d;) {
    pmf *= r * double(d - k) / double(k + 1);
    ++k;
    const double term = pmf * w(k);
    acc += term;
    peak = std::max(peak, term);
    if (term < peak * 1e-22 && k > k0 + 8) break;
  }
  pmf = pmf0;
  for (long k = k0; k > 1;) {
    pmf *= double(k) / (double(d - k + 1) * r);
    --k;
    const double term = pmf * w(k);
    acc += term;
    if (term < peak * 1e-22) break;
  }
  return acc;
}

// E[Bin(d, eps)^q] in binary64.
double binom_q_moment(double eps, long d, double q);

// Exact route: integer q >= 1 and d <= 1000.
Rational binom_q_moment_exact(const Rational& eps, long d, long q);

}  // namespace toruslab
