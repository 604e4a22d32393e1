#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "toruslab/rational.hpp"

using toruslab::Rational;

TEST_CASE("construction reduces and normalizes sign") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-3, -6) == Rational(1, 2));
  CHECK(Rational(3, -6) == Rational(-1, 2));
  CHECK(Rational(0, 7) == Rational(0));
  CHECK(Rational(5).str() == "5/1");
  CHECK_THROWS_AS(Rational(1, 0), toruslab::DivisionByZero);
}

TEST_CASE("parse accepts a/b and plain integers") {
  CHECK(Rational::parse("3/4") == Rational(3, 4));
  CHECK(Rational::parse("2") == Rational(2));
  CHECK(Rational::parse("-6/8") == Rational(-3, 4));
  CHECK_THROWS_AS(Rational::parse("abc"), toruslab::ParseError);
  CHECK_THROWS_AS(Rational::parse("1/0"), toruslab::DivisionByZero);
  CHECK_THROWS_AS(Rational::parse(""), toruslab::ParseError);
}

TEST_CASE("str round-trips through parse") {
  for (long n = -7; n <= 7; ++n)
    for (long d = 1; d <= 9; ++d) {
      Rational r(n, d);
      CHECK(Rational::parse(r.str()) == r);
    }
}

TEST_CASE("arithmetic identities") {
  Rational a(3, 7), b(-2, 5);
  CHECK(a + b == Rational(1, 35));
  CHECK(a - b == Rational(29, 35));
  CHECK(a * b == Rational(-6, 35));
  CHECK(a / b == Rational(-15, 14));
  CHECK(-(a * b) == Rational(6, 35));
  CHECK_THROWS_AS(a / Rational(0), toruslab::DivisionByZero);

  Rational acc(0);
  for (int i = 0; i < 10; ++i) acc += Rational(1, 10);
  CHECK(acc == Rational(1));
}

TEST_CASE("pow2 and pow") {
  CHECK(Rational::pow2(3) == Rational(8));
  CHECK(Rational::pow2(-4) == Rational(1, 16));
  CHECK(Rational::pow2(0) == Rational(1));
  CHECK(Rational(2, 3).pow(3) == Rational(8, 27));
  CHECK(Rational(5).pow(0) == Rational(1));
}

TEST_CASE("binomial coefficients") {
  CHECK(Rational::binom(5, 2) == Rational(10));
  CHECK(Rational::binom(10, 0) == Rational(1));
  CHECK(Rational::binom(10, 10) == Rational(1));
  CHECK(Rational::binom(3, 5) == Rational(0));
  // row sum of Pascal's triangle
  Rational s(0);
  for (unsigned long k = 0; k <= 20; ++k) s += Rational::binom(20, k);
  CHECK(s == Rational::pow2(20));
}

TEST_CASE("from_double is exact on dyadics") {
  CHECK(Rational::from_double(0.375) == Rational(3, 8));
  CHECK(Rational::from_double(-2.5) == Rational(-5, 2));
  CHECK(Rational::from_double(0.0) == Rational(0));
  double tiny = std::ldexp(1.0, -40);
  CHECK(Rational::from_double(tiny) == Rational::pow2(-40));
}

TEST_CASE("to_double and comparisons") {
  CHECK(Rational(1, 3).to_double() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(-1, 2) < Rational(0));
  CHECK(Rational(7, 3) >= Rational(7, 3));
  CHECK(Rational(2, 6) == Rational(1, 3));
  CHECK(Rational(1, 3) != Rational(2, 3));
}

TEST_CASE("huge exponents stay exact") {
  // 2^-300 * 2^300 == 1 without overflow
  CHECK(Rational::pow2(-300) * Rational::pow2(300) == Rational(1));
  Rational p = Rational(1, 3).pow(64);
  CHECK(p * Rational(3).pow(64) == Rational(1));
}
