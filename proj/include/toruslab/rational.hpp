#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <utility>

#include "toruslab/errors.hpp"

namespace toruslab {

// Exact rational arithmetic, backed by GMP.  Always canonical: lowest terms,
// denominator >= 1.  Closed under +,-,*,/ (signs allowed in intermediates);
// measure-valued results are asserted nonnegative at their construction
// sites, not here.
class Rational {
 public:
  Rational() : q_(0) {}
  Rational(long n) : q_(n) {}  // NOLINT: implicit by design, mirrors int
  Rational(long n, long d) {
    if (d == 0) throw DivisionByZero("Rational(n, 0)");
    q_ = mpq_class(n, d);
    q_.canonicalize();
  }
  explicit Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }
  explicit Rational(const mpz_class& n) : q_(n) {}

  // Parses "a/b" or "a" (optional leading '-').  Whitespace is not accepted.
  static Rational parse(const std::string& text);

  // Exact value of a binary64 (every finite double is a dyadic rational).
  static Rational from_double(double x);

  // 2^e for any integer e (negative allowed).
  static Rational pow2(long e);

  // Binomial coefficient C(n, k), exact.
  static Rational binom(unsigned long n, unsigned long k) {
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), n, k);
    return Rational(b);
  }

  std::string str() const;  // canonical "a/b" (denominator always printed)
  double to_double() const { return q_.get_d(); }

  const mpz_class& num() const { return q_.get_num(); }
  const mpz_class& den() const { return q_.get_den(); }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sign() == 0; }
  bool is_negative() const { return sign() < 0; }

  Rational pow(unsigned long e) const {
    mpq_class r;
    mpz_pow_ui(r.get_num().get_mpz_t(), q_.get_num().get_mpz_t(), e);
    mpz_pow_ui(r.get_den().get_mpz_t(), q_.get_den().get_mpz_t(), e);
    return Rational(std::move(r));  // canonical in, canonical out
  }

  friend Rational operator+(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ + b.q_)); }
  friend Rational operator-(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ - b.q_)); }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ * b.q_)); }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw DivisionByZero("Rational division by zero");
    return Rational(mpq_class(a.q_ / b.q_));
  }
  Rational operator-() const { return Rational(mpq_class(-q_)); }

  Rational& operator+=(const Rational& o) {
    q_ += o.q_;
    return *this;
  }
  Rational& operator-=(const Rational& o) {
    q_ -= o.q_;
    return *this;
  }
  Rational& operator*=(const Rational& o) {
    q_ *= o.q_;
    return *this;
  }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw DivisionByZero("Rational division by zero");
    q_ /= o.q_;
    return *this;
  }

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.q_ != b.q_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.q_ < b.q_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.q_ <= b.q_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.q_ > b.q_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.q_ >= b.q_; }

  const mpq_class& raw() const { return q_; }

 private:
  mpq_class q_;
};

inline Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace toruslab
