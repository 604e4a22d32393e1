#include "toruslab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "toruslab/binomial.hpp"
#include "toruslab/errors.hpp"

namespace toruslab {

namespace {

void require_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw BadExponent("p must lie in (1, inf)");
}

void require_q(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw BadExponent("q must lie in (1, inf)");
}

void require_eps_d(double eps, long d) {
  if (!(eps > 0.0) || !(eps <= 0.5)) throw BadEpsilon("eps must lie in (0, 1/2]");
  if (d < 1) throw Error("d must be >= 1");
}

}  // namespace

// -------------------------------------------------------------- regimes ----

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::small: return "small";
    case Regime::middle: return "middle";
    case Regime::large: return "large";
  }
  throw BranchUnknown("regime tag out of range");
}

double a_p(double eps, double d, double p) {
  require_p(p);
  return eps * std::pow(d, 1.0 / p);
}

double a_p(const Rational& eps, long d, double p) {
  return a_p(eps.to_double(), double(d), p);
}

RegimeReport classify_regime(double A, double p) {
  require_p(p);
  if (!(A > 0.0) || !std::isfinite(A)) throw Error("A must be positive and finite");
  const double q = p / (p - 1.0);
  const double lo = q * std::exp(-q);  // small/middle threshold
  const double hi = q * std::exp(-1.0);  // middle/large threshold

  RegimeReport rep;
  rep.p = p;
  rep.q = q;
  rep.A = A;

  auto b_small = [] { return 1.0; };
  auto b_middle = [&] { return q / std::log(q / A); };
  auto b_large = [&] { return std::exp(1.0) * A; };

  const double tol = 1e-12;
  if (std::abs(A - lo) <= tol * lo) {
    rep.regime = Regime::small;
    rep.regime_alt = Regime::middle;
    rep.boundary = true;
    rep.B = std::max(b_small(), b_middle());
  } else if (std::abs(A - hi) <= tol * hi) {
    rep.regime = Regime::middle;
    rep.regime_alt = Regime::large;
    rep.boundary = true;
    rep.B = std::max(b_middle(), b_large());
  } else if (A < lo) {
    rep.regime = Regime::small;
    rep.B = b_small();
  } else if (A > hi) {
    rep.regime = Regime::large;
    rep.B = b_large();
  } else {
    rep.regime = Regime::middle;
    rep.B = b_middle();
  }
  return rep;
}

// --------------------------------------------------------------- latala ----

double latala_eta(const Rational& eps, long d, double q) {
  require_q(q);
  const double e = eps.to_double();
  require_eps_d(e, d);
  // (1 + expm1(q/d)/eps)^(1/q) - 1, kept in log domain so tiny q/d survives.
  const double x = std::expm1(q / double(d)) / e;
  const double den = std::expm1(std::log1p(x) / q);
  return 1.0 / den;
}

double latala_eta_residual(const Rational& eps, long d, double q, double eta) {
  const double e = eps.to_double();
  // d log(1 + eps((1+1/eta)^q - 1)) - q, relative to q.
  const double inner = e * std::expm1(q * std::log1p(1.0 / eta));
  return (double(d) * std::log1p(inner) - q) / q;
}

double latala_eta_bisect(const Rational& eps, long d, double q) {
  require_q(q);
  const double e = eps.to_double();
  require_eps_d(e, d);
  // residual is decreasing in eta; bracket in log space.
  double lo = 1e-18, hi = 1e18;
  for (int i = 0; i < 200; ++i) {
    double mid = std::sqrt(lo * hi);
    if (latala_eta_residual(eps, d, q, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(lo * hi);
}

// -------------------------------------------------------------- moments ----

double height_q_moment(const Rational& eps, long d, double q, const Rational& q0) {
  const double e = eps.to_double();
  require_eps_d(e, d);
  return q0.to_double() * ((1.0 - e) * double(d) + binom_q_moment(e, d, q));
}

Rational height_q_moment_exact(const Rational& eps, long d, long q, const Rational& q0) {
  return q0 * ((Rational(1) - eps) * Rational(d) + binom_q_moment_exact(eps, d, q));
}

// ---------------------------------------------------------- upper bound ----

namespace {

// log of sigma(d') = d'(1-eps) + 1 - (1-eps)^d'  (shadow per q0).
double sigma_of(double eps, long d) {
  return double(d) * (1.0 - eps) + 1.0 - std::exp(double(d) * std::log1p(-eps));
}

// tau(d') = (1-eps) d' + E[Bin(d',eps)^q]  (height q-moment per q0).
double tau_of(double eps, long d, double q) {
  return (1.0 - eps) * double(d) + binom_q_moment(eps, d, q);
}

double ratio_pow_of(double eps, long d, double q) {
  return std::pow(tau_of(eps, d, q) / sigma_of(eps, d), 1.0 / q);
}

constexpr long kExhaustiveScanMax = 10000;

}  // namespace

double config_ratio_pow_inv_q(const Rational& eps, long dprime, double q) {
  require_q(q);
  const double e = eps.to_double();
  require_eps_d(e, dprime);
  return ratio_pow_of(e, dprime, q);
}

std::vector<double> upper_bound_weak_norm_batch(const Rational& eps, double p,
                                                const std::vector<long>& ds) {
  require_p(p);
  const double e = eps.to_double();
  const double q = p / (p - 1.0);
  long dmax = 1;
  for (long d : ds) {
    require_eps_d(e, d);
    dmax = std::max(dmax, d);
  }
  const long nsmall = std::min(dmax, kExhaustiveScanMax);

  // Exhaustive prefix maxima over d' <= nsmall, with one shared k^q table.
  std::vector<double> pw(size_t(nsmall) + 1, 0.0);
  for (long k = 1; k <= nsmall; ++k) pw[size_t(k)] = std::pow(double(k), q);
  std::vector<double> prefix(size_t(nsmall) + 1, 0.0);
  for (long dp = 1; dp <= nsmall; ++dp) {
    const double m = binom_weighted_sum(e, dp, [&pw](long k) { return pw[size_t(k)]; });
    const double val = std::pow(((1.0 - e) * double(dp) + m) / sigma_of(e, dp), 1.0 / q);
    prefix[size_t(dp)] = std::max(prefix[size_t(dp - 1)], val);
  }

  std::map<long, double> cache;  // windowed evaluations above the exhaustive range
  auto eval = [&](long dp) {
    auto it = cache.find(dp);
    if (it != cache.end()) return it->second;
    const double v = ratio_pow_of(e, dp, q);
    cache.emplace(dp, v);
    return v;
  };

  std::vector<double> out;
  out.reserve(ds.size());
  for (long d : ds) {
    double best = prefix[size_t(std::min(d, nsmall))];
    if (d > kExhaustiveScanMax) {
      // log-spaced samples (ratio 2^(1/4)) plus the forced candidates.
      for (double s = double(kExhaustiveScanMax);;) {
        s *= std::pow(2.0, 0.25);
        long dp = long(std::llround(s));
        if (dp >= d) break;
        best = std::max(best, eval(dp));
      }
      const double A = a_p(e, double(d), p);
      std::vector<long> forced = {d, long(std::ceil(q)),
                                  long(std::ceil(std::pow(2.0 * A, p)))};
      for (long dp : forced) {
        dp = std::clamp(dp, 1L, d);
        if (dp > kExhaustiveScanMax) best = std::max(best, eval(dp));
      }
    }
    out.push_back(best);
  }
  return out;
}

double upper_bound_weak_norm(const Rational& eps, long d, double p) {
  return upper_bound_weak_norm_batch(eps, p, {d}).front();
}

// ---------------------------------------------------- relevant quantity ----

double relevant_quantity(const Rational& eps, long d, double p) {
  require_p(p);
  const double q = p / (p - 1.0);
  return std::pow(double(d), -1.0 / q) * latala_eta(eps, d, q);
}

RqBranch rq_branch_from_string(const std::string& name) {
  if (name == "rq1") return RqBranch::rq1;
  if (name == "rq2") return RqBranch::rq2;
  if (name == "srq") return RqBranch::srq;
  if (name == "srq2") return RqBranch::srq2;
  throw BranchUnknown("unknown branch tag: " + name);
}

const char* rq_branch_name(RqBranch b) {
  switch (b) {
    case RqBranch::rq1: return "rq1";
    case RqBranch::rq2: return "rq2";
    case RqBranch::srq: return "srq";
    case RqBranch::srq2: return "srq2";
  }
  throw BranchUnknown("branch tag out of range");
}

double simplified_rq(double A, double q, RqBranch branch, double dval) {
  require_q(q);
  if (!(A > 0.0) || !std::isfinite(A)) throw Error("A must be positive and finite");
  // den(x) = (1+x)^(1/q) - 1 evaluated stably.
  auto den = [q](double x) { return std::expm1(std::log1p(x) / q); };
  switch (branch) {
    case RqBranch::rq1: {
      const double dv = std::isnan(dval) ? q : dval;
      if (!(dv > 0.0)) throw Error("rq1 needs a positive dimension parameter");
      return 1.0 / den(dv * std::exp(q / dv) / A);
    }
    case RqBranch::rq2: {
      const double dv = std::isnan(dval) ? q : dval;
      if (!(dv > 0.0)) throw Error("rq2 needs a positive dimension parameter");
      const double u = std::pow(dv, -1.0 / q);
      return u / den((q / A) * u);
    }
    case RqBranch::srq:
      return 1.0 / den(q / A);
    case RqBranch::srq2: {
      // w = (2A)^(-p/q) with p = q/(q-1), i.e. exponent -1/(q-1).
      const double w = std::pow(2.0 * A, -1.0 / (q - 1.0));
      return w / den((q / A) * w);
    }
  }
  throw BranchUnknown("branch tag out of range");
}

// ------------------------------------------------------------- endpoint ----

EndpointReport endpoint_machinery(const Rational& eps, long d) {
  const double e = eps.to_double();
  require_eps_d(e, d);
  EndpointReport rep;
  const double L = -std::log(e);  // log(1/eps) >= log 2
  rep.A = e * double(d) / L;
  rep.Lambda = 1.0 + 1.0 / (1.0 + rep.A);
  rep.c = std::log1p(1.0 / (1.0 + rep.A));
  const double lm1 = rep.Lambda - 1.0;
  rep.expmoment = std::exp(double(d) * std::log1p(lm1 * e));
  rep.expmoment_upper = std::exp(double(d) * lm1 * e);
  rep.inv_eps = 1.0 / e;
  return rep;
}

Rational exp_moment_atom_sum(const AtomSpace& space, const Rational& lambda) {
  const long d = space.d();
  // lambda^j per inner class, weighted by the class total.  In enumerated
  // mode the class totals are themselves sums over C(d,j) atoms, so this is
  // the full atom sum grouped by height.
  Rational acc(0);
  Rational pow_l(1);
  for (long j = 0; j <= d; ++j) {
    if (j > 0) pow_l = pow_l * lambda;
    acc = acc + pow_l * space.inner_class_atom_measure(j) * Rational::binom(d, j);
  }
  return acc;
}

double legendre_psi(double t, double eps, double c) {
  return eps / c * std::exp(c * t);
}

double legendre_phi(double x, double eps, double c) {
  if (!(x > eps)) return 0.0;
  return x / c * (std::log(x / eps) - 1.0);
}

double endpoint_upper_check(const StepFunction& f, double lambda) {
  const AtomSpace& space = f.space();
  const EndpointReport ep = endpoint_machinery(space.eps(), space.d());
  const StepFunction mf = apply_maximal(f).mf;
  const double num = superlevel_measure_f64(mf, lambda);
  const double den = (1.0 + ep.A) * llogl_functional(f, lambda);
  if (den == 0.0) throw DivisionByZero("endpoint ratio needs a nonvanishing f");
  return num / den;
}

// ------------------------------------------------------------- families ----

FamilyReport family_analysis(const std::vector<FamilyMember>& family,
                             const std::vector<double>& p_grid) {
  if (family.empty()) throw EmptyFamily("family has no members");
  for (const auto& m : family) require_eps_d(m.eps.to_double(), m.d);

  FamilyReport rep;
  const long n = long(family.size());
  for (long c = 10; c < n; c *= 10) rep.checkpoints.push_back(c);
  rep.checkpoints.push_back(n);

  for (const auto& m : family) {
    const double e = m.eps.to_double();
    rep.sup_d = std::max(rep.sup_d, double(m.d));
    rep.sup_A = std::max(rep.sup_A, e * double(m.d) / -std::log(e));
  }

  for (double p : p_grid) {
    require_p(p);
    FamilyTrajectory traj;
    traj.p = p;
    double sup = 0.0;
    size_t next = 0;
    for (long j = 0; j < n; ++j) {
      sup = std::max(sup, a_p(family[size_t(j)].eps, family[size_t(j)].d, p));
      if (next < rep.checkpoints.size() && j + 1 == rep.checkpoints[next]) {
        traj.sup_at_checkpoint.push_back(sup);
        ++next;
      }
    }
    const auto& s = traj.sup_at_checkpoint;
    const size_t k = s.size();
    if (k >= 2) {
      const bool growing_tail =
          k < 3 || (s[k - 1] > s[k - 2] && s[k - 2] > s[k - 3]);
      traj.divergent = growing_tail && s[k - 1] >= 1.1 * s[k - 2];
    }
    rep.per_p.push_back(std::move(traj));
  }
  return rep;
}

std::vector<FamilyMember> corollary_family(FamilyRule rule, double p0, long jmax) {
  if (!(p0 > 0.0)) throw BadExponent("p0 must be positive");
  if (jmax < 1) throw EmptyFamily("jmax must be >= 1");
  // floor with a snap to the nearest integer when pow lands within 1e-9 of
  // one, so integer p0 produces the exact powers.
  auto ifloor = [](double y) {
    const double r = std::round(y);
    if (std::abs(y - r) <= 1e-9 * std::max(1.0, std::abs(r))) return long(r);
    return long(std::floor(y));
  };
  std::vector<FamilyMember> fam;
  fam.reserve(size_t(jmax));
  for (long j = 1; j <= jmax; ++j) {
    const double base = std::pow(double(j), p0);
    const long d = rule == FamilyRule::closed
                       ? ifloor(base)
                       : ifloor(std::log(double(j) + 2.0) * base);
    if (d < 1) continue;  // leading members can round to zero
    fam.push_back({Rational(1, j + 1), d});
  }
  if (fam.empty()) throw EmptyFamily("family rule produced no members");
  return fam;
}

}  // namespace toruslab
