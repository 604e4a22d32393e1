#include "toruslab/rubio_basis.hpp"

#include <algorithm>
#include <string>

namespace toruslab {

namespace {

// Steps the exponent vector forward by one level (sum grows by exactly 1).
// At a uniform state (k,...,k) of length n the invariant k in {n-1, n}
// holds; k == n starts an append block, k == n-1 starts a raise block.
void advance_until(std::vector<int>& vec, long& cur, long target) {
  while (cur < target) {
    const int k = vec.front();
    const bool uniform = std::all_of(vec.begin(), vec.end(), [&](int e) { return e == k; });
    if (uniform) {
      const long n = static_cast<long>(vec.size());
      if (k == n) {
        vec.push_back(1);  // new coordinate enters at exponent 1
        ++cur;
      } else {
        vec.front() = k + 1;  // begin raising left-to-right
        ++cur;
      }
    } else if (vec.back() < k && std::all_of(vec.begin(), vec.end() - 1,
                                             [&](int e) { return e == k; })) {
      ++vec.back();  // append block: grow the new coordinate toward k
      ++cur;
    } else {
      // raise block: first coordinate still at the old maximum
      auto it = std::find(vec.begin(), vec.end(), k - 1);
      *it = k;
      ++cur;
    }
  }
}

}  // namespace

BasisLevel basis_level(long m) {
  if (m < 1) throw BadExponent("level index must be >= 1, got " + std::to_string(m));
  std::vector<int> vec{1};
  long cur = 1;
  advance_until(vec, cur, m);
  return BasisLevel{m, std::move(vec)};
}

long first_level_with_coords(long n) {
  if (n < 1) throw BadExponent("coordinate count must be >= 1");
  std::vector<int> vec{1};
  long cur = 1;
  while (static_cast<long>(vec.size()) < n) advance_until(vec, cur, cur + 1);
  return cur;
}

Rational ConfigSpec::shift_of(long k) const {
  if (k < 1 || k > d) throw Error("shift index must lie in 1..d");
  return (Rational(1) - eps) * Rational::pow2(-exponents.at(static_cast<std::size_t>(k) - 1));
}

ConfigSpec make_config(const Rational& eps, long d, std::optional<long> m_override) {
  if (eps.sign() <= 0 || eps > Rational(1, 2))
    throw BadEpsilon("eps must lie in (0, 1/2], got " + eps.str());
  if (d < 1) throw Error("d must be >= 1");
  const long m = m_override.value_or(first_level_with_coords(d));
  BasisLevel level = basis_level(m);
  if (level.coords() < d)
    throw BadExponent("level " + std::to_string(m) + " has only " +
                      std::to_string(level.coords()) + " coordinates, need " + std::to_string(d));
  ConfigSpec cfg;
  cfg.eps = eps;
  cfg.d = d;
  cfg.m = m;
  cfg.exponents = std::move(level.exponents);
  cfg.translation.assign(cfg.exponents.size(), Rational(0));
  validate_config(cfg);
  return cfg;
}

void validate_config(const ConfigSpec& cfg) {
  if (cfg.eps.sign() <= 0 || cfg.eps > Rational(1, 2))
    throw BadEpsilon("eps must lie in (0, 1/2], got " + cfg.eps.str());
  if (cfg.d < 1) throw Error("d must be >= 1");
  const BasisLevel level = basis_level(cfg.m);
  if (level.exponents != cfg.exponents)
    throw BadExponent("exponents do not match level " + std::to_string(cfg.m));
  if (static_cast<long>(cfg.exponents.size()) < cfg.d)
    throw BadExponent("level has fewer coordinates than d");
  if (cfg.translation.size() != cfg.exponents.size())
    throw Error("translation size must match coordinate count");
  for (std::size_t i = 0; i < cfg.translation.size(); ++i) {
    const Rational& t = cfg.translation[i];
    if (t.is_negative() || t >= Rational(1))
      throw NonAlignable("translation component out of [0, 1): " + t.str());
    const Rational steps = t * Rational::pow2(cfg.exponents[i]);
    if (steps.den() != 1)
      throw NonAlignable("translation component " + t.str() + " is not a multiple of 2^-" +
                         std::to_string(cfg.exponents[i]));
  }
}

AtomSpace config_to_atom_space(const ConfigSpec& cfg, std::optional<bool> symmetric) {
  validate_config(cfg);
  return build_atom_space(cfg.eps, cfg.d, cfg.q0_measure(), symmetric);
}

}  // namespace toruslab
