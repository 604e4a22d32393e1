#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "toruslab/bounds.hpp"
#include "toruslab/binomial.hpp"

#include <cmath>

using namespace toruslab;

TEST_CASE("A_p and the three regimes") {
  CHECK(a_p(Rational(1, 2), 2, 2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(a_p(0.5, 2.0, 2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(a_p(Rational(1, 4), 16, 4.0) == doctest::Approx(0.5).epsilon(1e-15));

  // flagship point: (1/2, 2, p=2) lands in the middle regime
  auto rep = classify_regime(a_p(0.5, 2.0, 2.0), 2.0);
  CHECK(rep.q == doctest::Approx(2.0));
  CHECK(rep.regime == Regime::middle);
  CHECK_FALSE(rep.boundary);
  CHECK(rep.B == doctest::Approx(2.0 / std::log(2.0 / std::sqrt(0.5))).epsilon(1e-12));
  CHECK(rep.B == doctest::Approx(1.92360).epsilon(1e-4));

  // deep small regime: constant 1
  auto small = classify_regime(0.01, 2.0);
  CHECK(small.regime == Regime::small);
  CHECK(small.B == doctest::Approx(1.0));

  // deep large regime: B = e A
  auto large = classify_regime(10.0, 2.0);
  CHECK(large.regime == Regime::large);
  CHECK(large.B == doctest::Approx(std::exp(1.0) * 10.0).epsilon(1e-12));

  // q = p/(p-1)
  CHECK(classify_regime(0.5, 4.0 / 3.0).q == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("regime boundaries take the max of the adjacent formulas") {
  double q = 2.0;
  // A = q e^-q: both small and middle give 1
  auto b1 = classify_regime(q * std::exp(-q), 2.0);
  CHECK(b1.boundary);
  CHECK(b1.B == doctest::Approx(1.0).epsilon(1e-12));
  // A = q/e: middle gives q/log(e) = q, large gives e (q/e) = q
  auto b2 = classify_regime(q / std::exp(1.0), 2.0);
  CHECK(b2.boundary);
  CHECK(b2.B == doctest::Approx(q).epsilon(1e-12));
  CHECK(b2.regime != b2.regime_alt);
}

TEST_CASE("eta solves its defining equation") {
  // closed form at (1/2, 1, q=2): 1/(sqrt(2 e^2 - 1) - 1)
  double eta = latala_eta(Rational(1, 2), 1, 2.0);
  CHECK(eta == doctest::Approx(0.3687468).epsilon(1e-6));
  CHECK(std::abs(latala_eta_residual(Rational(1, 2), 1, 2.0, eta)) <= 1e-12);

  double eta22 = latala_eta(Rational(1, 2), 2, 2.0);
  CHECK(eta22 == doctest::Approx(0.9039013).epsilon(1e-6));

  // bisection agrees with the closed form
  for (long d : {1L, 3L, 50L}) {
    double a = latala_eta(Rational(1, 8), d, 3.0);
    double b = latala_eta_bisect(Rational(1, 8), d, 3.0);
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
  }
}

TEST_CASE("binomial moments, windowed and exact") {
  CHECK(binom_q_moment(0.5, 2, 2.0) == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(binom_q_moment_exact(Rational(1, 2), 2, 2) == Rational(3, 2));
  CHECK(binom_q_moment_exact(Rational(1, 3), 3, 3) == Rational(29, 9));
  // indicator case: E[Bin(1,eps)^q] = eps for every q
  CHECK(binom_q_moment_exact(Rational(1, 7), 1, 5) == Rational(1, 7));
  CHECK(binom_q_moment(1.0 / 7.0, 1, 2.5) == doctest::Approx(1.0 / 7.0).epsilon(1e-13));
  // windowed evaluation tracks the exact sum at large d
  double w = binom_q_moment(0.25, 500, 3.0);
  double e = binom_q_moment_exact(Rational(1, 4), 500, 3).to_double();
  CHECK(w == doctest::Approx(e).epsilon(1e-12));
}

TEST_CASE("height moment and the configuration ratio") {
  CHECK(height_q_moment(Rational(1, 2), 2, 2.0, Rational(1, 6)) ==
        doctest::Approx(5.0 / 12.0).epsilon(1e-13));
  CHECK(height_q_moment_exact(Rational(1, 2), 2, 2, Rational(1, 6)) == Rational(5, 12));
  // q = 1 telescopes: integral of h = d q0
  CHECK(height_q_moment_exact(Rational(1, 3), 7, 1, Rational(1, 16)) == Rational(7, 16));

  // C^(1/q) at the flagship point: sqrt(tau/sigma) = sqrt(2.5/1.75)
  CHECK(config_ratio_pow_inv_q(Rational(1, 2), 2, 2.0) ==
        doctest::Approx(std::sqrt(2.5 / 1.75)).epsilon(1e-12));
  CHECK(config_ratio_pow_inv_q(Rational(1, 2), 1, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("upper bound scans nested subconfigurations") {
  // d = 1 collapses to C = 1
  for (double p : {4.0 / 3.0, 2.0, 4.0})
    CHECK(upper_bound_weak_norm(Rational(1, 2), 1, p) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(upper_bound_weak_norm(Rational(1, 2), 2, 2.0) ==
        doctest::Approx(1.1952286).epsilon(1e-6));
  // nested max is monotone in d
  CHECK(upper_bound_weak_norm(Rational(1, 2), 4, 2.0) >=
        upper_bound_weak_norm(Rational(1, 2), 2, 2.0));

  // batch variant returns the pointwise values
  std::vector<long> ds;
  for (long d = 1; d <= 30; ++d) ds.push_back(d);
  ds.push_back(100);
  ds.push_back(1000);
  auto batch = upper_bound_weak_norm_batch(Rational(1, 3), 4.0 / 3.0, ds);
  REQUIRE(batch.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    CHECK(batch[i] == doctest::Approx(upper_bound_weak_norm(Rational(1, 3), ds[i], 4.0 / 3.0))
                          .epsilon(1e-12));
}

TEST_CASE("display quantities and their simplified branches") {
  CHECK(relevant_quantity(Rational(1, 2), 1, 2.0) == doctest::Approx(0.3687468).epsilon(1e-6));

  // srq at A = q: 1/((1+1)^(1/q)-1)
  CHECK(simplified_rq(2.0, 2.0, RqBranch::srq) ==
        doctest::Approx(1.0 / (std::sqrt(2.0) - 1.0)).epsilon(1e-12));
  // rq1/rq2 meet srq-scale values at d = q
  double srq = simplified_rq(0.5, 2.0, RqBranch::srq);
  double rq1 = simplified_rq(0.5, 2.0, RqBranch::rq1, 2.0);
  double rq2 = simplified_rq(0.5, 2.0, RqBranch::rq2, 2.0);
  CHECK(rq1 / srq > 0.1);
  CHECK(rq1 / srq < 10.0);
  CHECK(rq2 / srq > 0.1);
  CHECK(rq2 / srq < 10.0);
  // rq2 approaches A from the high side as d grows
  CHECK(simplified_rq(0.5, 2.0, RqBranch::rq2, 1e12) == doctest::Approx(0.5).epsilon(1e-3));

  CHECK(rq_branch_from_string("srq2") == RqBranch::srq2);
  CHECK(rq_branch_name(RqBranch::rq2) == std::string("rq2"));
  CHECK_THROWS_AS(rq_branch_from_string("rq3"), BranchUnknown);
}

TEST_CASE("endpoint machinery at the reference configuration") {
  auto ep = endpoint_machinery(Rational(1, 4), 8);
  CHECK(ep.A == doctest::Approx(2.0 / std::log(4.0)).epsilon(1e-12));
  CHECK(ep.Lambda == doctest::Approx(1.0 + 1.0 / (1.0 + ep.A)).epsilon(1e-12));
  CHECK(ep.c == doctest::Approx(0.3431525).epsilon(1e-5));
  CHECK(ep.expmoment == doctest::Approx(std::pow(1.0 + (ep.Lambda - 1.0) * 0.25, 8)).epsilon(1e-12));
  CHECK(ep.expmoment <= ep.expmoment_upper);
  CHECK(ep.expmoment_upper <= ep.inv_eps);
  CHECK(ep.inv_eps == doctest::Approx(4.0));
}

TEST_CASE("exponential moment by atom sum") {
  auto sp = build_atom_space(Rational(1, 2), 2, Rational(1, 6), std::nullopt);
  CHECK(exp_moment_atom_sum(sp, Rational(2)) == Rational(3, 8));
  auto sym = build_atom_space(Rational(1, 2), 2, Rational(1, 6), true);
  CHECK(exp_moment_atom_sum(sym, Rational(2)) == Rational(3, 8));
  // q0 (1 + (lambda-1) eps)^d in general
  auto sp3 = build_atom_space(Rational(1, 3), 5, Rational(1, 16), std::nullopt);
  Rational want = Rational(1, 16) * (Rational(1) + Rational(4, 5) * Rational(1, 3)).pow(5);
  CHECK(exp_moment_atom_sum(sp3, Rational(9, 5)) == want);
}

TEST_CASE("legendre pair obeys Young's inequality with equality on the ray") {
  double eps = 0.25, d = 8;
  auto ep = endpoint_machinery(Rational(1, 4), long(d));
  for (double x : {0.3, 1.0, 7.0})
    for (double t : {0.1, 1.0, 4.0}) {
      double lhs = x * t;
      double rhs = legendre_phi(x, eps, ep.c) + legendre_psi(t, eps, ep.c);
      CHECK(lhs <= rhs + 1e-12 * std::max(1.0, lhs));
    }
  // equality at t* = log(x/eps)/c
  double x = 3.0;
  double tstar = std::log(x / eps) / ep.c;
  CHECK(x * tstar == doctest::Approx(legendre_phi(x, eps, ep.c) + legendre_psi(tstar, eps, ep.c))
                         .epsilon(1e-12));
  CHECK(legendre_phi(eps, eps, ep.c) == 0.0);
  CHECK(legendre_phi(0.5 * eps, eps, ep.c) == 0.0);
}

TEST_CASE("endpoint ratio rejects the zero function") {
  auto sp = build_atom_space(Rational(1, 4), 3, Rational(1, 8), std::nullopt);
  CHECK_THROWS_AS(endpoint_upper_check(StepFunction::zeros(sp, NumericMode::exact), 0.5),
                  DivisionByZero);
  // base indicator: superlevel below eps is the shadow; ratio is positive and finite
  double r = endpoint_upper_check(indicator_q0(sp), 0.125);
  CHECK(r > 0.0);
  CHECK(std::isfinite(r));
}

TEST_CASE("family analysis of the corollary families") {
  auto fam = corollary_family(FamilyRule::closed, 2.0, 100);
  auto rep = family_analysis(fam, {1.5, 2.0});
  REQUIRE(rep.checkpoints == std::vector<long>{10, 100});
  REQUIRE(rep.per_p.size() == 2);
  // at p0 the sup stays bounded (members give j/(j+1) < 1)
  CHECK(rep.per_p[1].sup_at_checkpoint.back() <= 2.0);
  CHECK_FALSE(rep.per_p[1].divergent);
  // below p0 it blows up: sup grows like j^(1/3) here
  CHECK(rep.per_p[0].divergent);
  CHECK(rep.per_p[0].sup_at_checkpoint.back() >
        2.0 * rep.per_p[0].sup_at_checkpoint.front());
  CHECK(rep.sup_d == doctest::Approx(10000.0));

  auto open = corollary_family(FamilyRule::open, 2.0, 1000);
  auto orep = family_analysis(open, {2.0});
  CHECK(orep.per_p[0].divergent);  // unbounded already at p0

  CHECK_THROWS_AS(family_analysis({}, {2.0}), EmptyFamily);
  CHECK_THROWS_AS(corollary_family(FamilyRule::closed, 2.0, 0), EmptyFamily);

  // single member: checkpoints collapse to {1}
  auto one = family_analysis({{Rational(1, 2), 4}}, {2.0});
  CHECK(one.checkpoints == std::vector<long>{1});
  CHECK(one.per_p[0].sup_at_checkpoint.back() == doctest::Approx(1.0).epsilon(1e-12));
}
