#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "toruslab/rubio_basis.hpp"

using namespace toruslab;

TEST_CASE("first ten levels") {
  const std::vector<std::vector<int>> want = {
      {1},       {1, 1},    {2, 1},    {2, 2},    {2, 2, 1},
      {2, 2, 2}, {3, 2, 2}, {3, 3, 2}, {3, 3, 3}, {3, 3, 3, 1},
  };
  for (long m = 1; m <= 10; ++m) {
    auto lvl = basis_level(m);
    CHECK(lvl.m == m);
    CHECK(lvl.exponents == want[static_cast<std::size_t>(m - 1)]);
    CHECK(lvl.measure() == Rational::pow2(-m));
  }
  CHECK(basis_level(3).sidelength(0) == Rational(1, 4));
  CHECK(basis_level(3).sidelength(1) == Rational(1, 2));
  CHECK_THROWS_AS(basis_level(0), BadExponent);
}

TEST_CASE("levels stay nonincreasing with halving measure") {
  auto prev = basis_level(1);
  for (long m = 2; m <= 300; ++m) {
    auto lvl = basis_level(m);
    long sum = 0;
    for (std::size_t i = 0; i < lvl.exponents.size(); ++i) {
      sum += lvl.exponents[i];
      if (i + 1 < lvl.exponents.size()) CHECK(lvl.exponents[i] >= lvl.exponents[i + 1]);
    }
    CHECK(sum == m);
    CHECK(lvl.measure() * Rational(2) == prev.measure());
    // coordinate count never shrinks
    CHECK(lvl.coords() >= prev.coords());
    prev = lvl;
  }
}

TEST_CASE("first_level_with_coords is minimal") {
  CHECK(first_level_with_coords(1) == 1);
  CHECK(first_level_with_coords(2) == 2);
  CHECK(first_level_with_coords(3) == 5);
  CHECK(first_level_with_coords(4) == 10);
  CHECK(first_level_with_coords(5) == 17);
  for (long n = 1; n <= 20; ++n) {
    long m = first_level_with_coords(n);
    CHECK(basis_level(m).coords() >= n);
    if (m > 1) CHECK(basis_level(m - 1).coords() < n);
  }
  CHECK_THROWS_AS(first_level_with_coords(0), BadExponent);
}

TEST_CASE("make_config picks the smallest feasible level") {
  auto c2 = make_config(Rational(1, 2), 2);
  CHECK(c2.m == 2);
  CHECK(c2.exponents == std::vector<int>{1, 1});
  CHECK(c2.q0_measure() == Rational(1, 4));
  CHECK(c2.translation == std::vector<Rational>(2, Rational(0)));
  CHECK(c2.shift_of(1) == Rational(1, 4));  // (1-eps) 2^-l_1

  auto c3 = make_config(Rational(1, 4), 3);
  CHECK(c3.m == 5);
  CHECK(c3.exponents == std::vector<int>{2, 2, 1});
  CHECK(c3.shift_of(3) == Rational(3, 8));

  // override must provide at least d coordinates
  auto c3b = make_config(Rational(1, 4), 3, 6);
  CHECK(c3b.m == 6);
  CHECK_THROWS_AS(make_config(Rational(1, 4), 3, 4), BadExponent);
  CHECK_THROWS_AS(make_config(Rational(2, 3), 1), BadEpsilon);
  CHECK_THROWS_AS(make_config(Rational(1, 2), 0), Error);
}

TEST_CASE("validate_config rejects broken specs") {
  auto cfg = make_config(Rational(1, 2), 2);
  CHECK_NOTHROW(validate_config(cfg));

  auto bad = cfg;
  bad.exponents = {2, 1};
  CHECK_THROWS_AS(validate_config(bad), BadExponent);

  bad = cfg;
  bad.translation = {Rational(1, 3), Rational(0)};  // not a multiple of 2^-1
  CHECK_THROWS_AS(validate_config(bad), NonAlignable);

  bad = cfg;
  bad.translation = {Rational(3, 2), Rational(0)};  // outside [0, 1)
  CHECK_THROWS_AS(validate_config(bad), NonAlignable);

  bad = cfg;
  bad.translation.pop_back();
  CHECK_THROWS_AS(validate_config(bad), Error);

  bad = cfg;
  bad.d = 5;  // level 2 only has two coordinates
  CHECK_THROWS_AS(validate_config(bad), BadExponent);
}

TEST_CASE("config_to_atom_space carries the exact measure data") {
  auto cfg = make_config(Rational(1, 2), 2);
  auto sp = config_to_atom_space(cfg);
  CHECK(sp.eps() == Rational(1, 2));
  CHECK(sp.d() == 2);
  CHECK(sp.q0_measure() == Rational(1, 4));
  CHECK_FALSE(sp.symmetric_mode());
  CHECK(shadow_measure(sp) == Rational(7, 16));

  // translation does not change any measure
  auto moved = cfg;
  moved.translation = {Rational(1, 2), Rational(0)};
  auto sp2 = config_to_atom_space(moved);
  CHECK(sp2.q0_measure() == sp.q0_measure());
  CHECK(shadow_measure(sp2) == shadow_measure(sp));

  // storage override
  auto sym = config_to_atom_space(cfg, true);
  CHECK(sym.symmetric_mode());
  CHECK(shadow_measure(sym) == shadow_measure(sp));
}
