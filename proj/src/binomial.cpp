#include "toruslab/binomial.hpp"

#include "toruslab/errors.hpp"

namespace toruslab {

double binom_q_moment(double eps, long d, double q) {
  if (!(eps > 0.0) || !(eps <= 0.5)) throw BadEpsilon("eps must lie in (0, 1/2]");
  if (d < 1) throw Error("d must be >= 1");
  if (!(q > 0.0)) throw BadExponent("q must be positive");
  return binom_weighted_sum(eps, d, [q](long k) { return std::pow(double(k), q); });
}

Rational binom_q_moment_exact(const Rational& eps, long d, long q) {
  if (q < 1) throw BadExponent("exact moment needs integer q >= 1");
  if (d < 1) throw Error("d must be >= 1");
  if (d > 1000) throw Error("exact moment limited to d <= 1000");
  if (eps.sign() <= 0 || eps > Rational(1, 2)) throw BadEpsilon("eps must lie in (0, 1/2]");
  const Rational comp = Rational(1) - eps;
  Rational acc(0);
  // pmf(k) = C(d,k) eps^k (1-eps)^(d-k), accumulated by the same ratio walk.
  Rational pmf = comp.pow(static_cast<unsigned long>(d));
  for (long k = 1; k <= d; ++k) {
    pmf = pmf * eps * Rational(d - k + 1) / (comp * Rational(k));
    acc = acc + pmf * Rational(k).pow(static_cast<unsigned long>(q));
  }
  return acc;
}

}  // namespace toruslab
