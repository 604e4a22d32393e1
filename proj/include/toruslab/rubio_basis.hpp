#pragma once

#include <optional>
#include <vector>

#include "toruslab/atom_space.hpp"
#include "toruslab/rational.hpp"

namespace toruslab {

// ---------------------------------------------------------------------------
// Dyadic basis levels on the infinite torus.
//
// Level m is a finite exponent vector (l_1, ..., l_n); the basis rectangle is
// V_m = (0, 2^-l_1) x ... x (0, 2^-l_n) x T^inf, so |V_m| = 2^-(sum l_i) and
// every step halves the measure: |V_m| = 2^-m.
//
// The sequence starts (1), (1,1), (2,1), (2,2), (2,2,1), (2,2,2), (3,2,2),
// (3,3,2), (3,3,3), (3,3,3,1) and continues by the block rule: from a
// uniform state (k,...,k) of length n, append a new coordinate and raise its
// exponent 1..k over k steps when k == n, otherwise (k == n-1) raise the
// coordinates left-to-right from k to k+1 over n steps.
// ---------------------------------------------------------------------------

struct BasisLevel {
  long m = 0;
  std::vector<int> exponents;  // nonincreasing; sum == m

  long coords() const { return static_cast<long>(exponents.size()); }
  Rational measure() const { return Rational::pow2(-m); }  // |V_m| = 2^-m
  Rational sidelength(long i) const { return Rational::pow2(-exponents.at(i)); }
};

// Exponent vector of level m (m >= 1, else BadExponent).
BasisLevel basis_level(long m);

// Smallest m whose level has at least n coordinates.
long first_level_with_coords(long n);

// ---------------------------------------------------------------------------
// A concrete (eps, d)-configuration: base rectangle Q0 = translation + V_m,
// and d shifted copies Q_k = Q0 + T_k where T_k moves coordinate k by
// (1-eps) * 2^-l_k.  Needs d <= coords(m); make_config picks the smallest
// such m, which also guarantees |Q0| = 2^-m <= 2^-d and hence feasibility.
// ---------------------------------------------------------------------------

struct ConfigSpec {
  Rational eps;
  long d = 0;
  long m = 0;
  std::vector<int> exponents;
  std::vector<Rational> translation;  // grid-aligned: translation[i] * 2^l_i integral, in [0,1)

  Rational q0_measure() const { return Rational::pow2(-m); }
  // Shift of Q_k along coordinate k (k in 1..d): (1-eps) * 2^-l_k.
  Rational shift_of(long k) const;
};

// Builds the configuration with zero translation.  m_override, if given,
// must name a level with at least d coordinates (BadExponent otherwise).
ConfigSpec make_config(const Rational& eps, long d, std::optional<long> m_override = std::nullopt);

// Checks eps, d vs coordinate count, exponent vector against basis_level(m),
// and translation alignment.  Throws on violation.
void validate_config(const ConfigSpec& cfg);

// Forgets the geometry, keeping the exact measure data.
AtomSpace config_to_atom_space(const ConfigSpec& cfg,
                               std::optional<bool> symmetric = std::nullopt);

}  // namespace toruslab
