#include "toruslab/rational.hpp"

#include <cctype>
#include <cmath>

namespace toruslab {

Rational Rational::parse(const std::string& text) {
  if (text.empty()) throw ParseError("empty rational literal");
  auto digits_ok = [](const std::string& s, size_t from) {
    if (from >= s.size()) return false;
    for (size_t i = from; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
  };
  const auto slash = text.find('/');
  std::string num = slash == std::string::npos ? text : text.substr(0, slash);
  std::string den = slash == std::string::npos ? std::string("1") : text.substr(slash + 1);
  size_t num_start = (!num.empty() && num[0] == '-') ? 1 : 0;
  if (!digits_ok(num, num_start) || !digits_ok(den, 0))
    throw ParseError("bad rational literal: '" + text + "'");
  mpz_class n(num), d(den);
  if (d == 0) throw DivisionByZero("rational literal with zero denominator: '" + text + "'");
  mpq_class q(n, d);
  q.canonicalize();
  return Rational(std::move(q));
}

Rational Rational::from_double(double x) {
  if (!std::isfinite(x)) throw ParseError("from_double on non-finite value");
  mpq_class q(x);  // exact binary expansion
  q.canonicalize();
  return Rational(std::move(q));
}

Rational Rational::pow2(long e) {
  mpq_class q;
  if (e >= 0) {
    mpz_class n(1);
    n <<= static_cast<unsigned long>(e);
    q = n;
  } else {
    mpz_class d(1);
    d <<= static_cast<unsigned long>(-e);
    q = mpq_class(1, d);
  }
  return Rational(std::move(q));
}

std::string Rational::str() const {
  return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

}  // namespace toruslab
