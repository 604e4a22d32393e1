#pragma once

#include <limits>
#include <string>
#include <vector>

#include "toruslab/atom_space.hpp"
#include "toruslab/binomial.hpp"
#include "toruslab/maximal.hpp"
#include "toruslab/rational.hpp"

namespace toruslab {

// ---------------------------------------------------------------------------
// Weak-type regime bound.  With q = p/(p-1) and A = eps d^(1/p):
//   small  : A <= q e^-q        B = 1
//   middle : q e^-q <= A <= q/e B = q / log(q/A)
//   large  : A >= q/e           B = e A
// B is continuous across both thresholds (q/log(q/A) -> 1 at A = q e^-q and
// -> q = eA at A = q/e), so the closed-boundary overlap is harmless.
// ---------------------------------------------------------------------------

enum class Regime : int { small = 0, middle = 1, large = 2 };

const char* regime_name(Regime r);

struct RegimeReport {
  double p = 0.0;
  double q = 0.0;
  double A = 0.0;
  Regime regime = Regime::small;
  double B = 0.0;  // at a boundary: max of the two adjacent formulas
  bool boundary = false;
  Regime regime_alt = Regime::small;  // meaningful iff boundary
};

// A_p = eps d^(1/p); p in (1, inf).
double a_p(const Rational& eps, long d, double p);
double a_p(double eps, double d, double p);

RegimeReport classify_regime(double A, double p);

// ---------------------------------------------------------------------------
// Latala functional for the i.i.d. covering indicators: eta solves
//   [1 + eps((1 + 1/eta)^q - 1)]^d = e^q,
// closed form eta = 1 / ((1 + (exp(q/d) - 1)/eps)^(1/q) - 1).
// ---------------------------------------------------------------------------

double latala_eta(const Rational& eps, long d, double q);
// log-domain residual of the defining equation, relative to q.
double latala_eta_residual(const Rational& eps, long d, double q, double eta);
// Independent recomputation by bisection on the defining equation.
double latala_eta_bisect(const Rational& eps, long d, double q);

// integral h^q dmu = (1-eps) d q0 + q0 E[Bin(d,eps)^q]; the binomial moment
// itself lives in binomial.hpp.
double height_q_moment(const Rational& eps, long d, double q, const Rational& q0);
Rational height_q_moment_exact(const Rational& eps, long d, long q, const Rational& q0);

// C_{d'}^(1/q) where C_{d'} = (integral of h^q) / |sh| for an (eps, d')
// configuration (the |Q0| factors cancel).
double config_ratio_pow_inv_q(const Rational& eps, long dprime, double q);

// Certified weak-norm upper bound: max over d' <= d of C_{d'}^(1/q).  The d'
// scan is exhaustive for d <= 10^4 and log-sampled above, always including
// d' = d, ceil(q) and ceil((2A)^p).
double upper_bound_weak_norm(const Rational& eps, long d, double p);
// Batch variant sharing the exhaustive scan; same values as the pointwise call.
std::vector<double> upper_bound_weak_norm_batch(const Rational& eps, double p,
                                                const std::vector<long>& ds);

// d^(-1/q) * latala_eta: the exact-model analogue of the B machinery.
double relevant_quantity(const Rational& eps, long d, double p);

// Display formulas around the relevant quantity.  rq1/rq2 take the (real)
// dimension parameter; srq/srq2 depend on (A, q) alone.
enum class RqBranch : int { rq1, rq2, srq, srq2 };
RqBranch rq_branch_from_string(const std::string& name);  // BranchUnknown on bad tag
const char* rq_branch_name(RqBranch b);
double simplified_rq(double A, double q, RqBranch branch,
                     double dval = std::numeric_limits<double>::quiet_NaN());

// ---------------------------------------------------------------------------
// L log L endpoint machinery: A = eps d / log(1/eps), Lambda = 1 + 1/(1+A)
// (so (1+A)(Lambda-1) = 1), c = log Lambda, and the exponential moment chain
//   (1 + (Lambda-1) eps)^d <= exp(d (Lambda-1) eps) <= 1/eps.
// ---------------------------------------------------------------------------

struct EndpointReport {
  double A = 0.0;
  double c = 0.0;
  double Lambda = 0.0;
  double expmoment = 0.0;        // (1 + (Lambda-1) eps)^d
  double expmoment_upper = 0.0;  // exp(d (Lambda-1) eps)
  double inv_eps = 0.0;
};

EndpointReport endpoint_machinery(const Rational& eps, long d);

// integral over Q0 of lambda^h dmu, exact, by atom sum (enumerated: one term
// per atom via subset enumeration; symmetric: per class).  Equals
// q0 (1 + (lambda-1) eps)^d for every rational lambda.
Rational exp_moment_atom_sum(const AtomSpace& space, const Rational& lambda);

// psi(t) = (eps/c) exp(c t) and its Legendre transform over t > 0:
// phi(x) = (x/c)(log(x/eps) - 1) for x > eps, else 0 (sup clamped at 0).
double legendre_psi(double t, double eps, double c);
double legendre_phi(double x, double eps, double c);

// mu{Mf > lambda} / ((1+A) * llogl(f, lambda)); DivisionByZero when f vanishes.
double endpoint_upper_check(const StepFunction& f, double lambda);

// ---------------------------------------------------------------------------
// Families of configurations (one (eps_j, d_j) per member).
// ---------------------------------------------------------------------------

struct FamilyMember {
  Rational eps;
  long d = 0;
};

struct FamilyTrajectory {
  double p = 0.0;
  std::vector<double> sup_at_checkpoint;  // running sup of A_p at each checkpoint
  bool divergent = false;
};

struct FamilyReport {
  std::vector<long> checkpoints;  // 1-based member counts, increasing, last = family size
  std::vector<FamilyTrajectory> per_p;
  double sup_d = 0.0;
  double sup_A = 0.0;  // sup of eps_j d_j / log(1/eps_j)
};

// EmptyFamily on an empty list.  Divergence flag: the running sup still grows
// by >= 10% over the last checkpoint decade and increases across the final
// three checkpoints.
FamilyReport family_analysis(const std::vector<FamilyMember>& family,
                             const std::vector<double>& p_grid);

enum class FamilyRule : int { closed, open };

// eps_j = 1/(j+1) with d_j = floor(j^p0) (closed: bounded exactly on [p0, inf])
// or d_j = floor(log(j+2) j^p0) (open: bounded exactly on (p0, inf)).
std::vector<FamilyMember> corollary_family(FamilyRule rule, double p0, long jmax);

}  // namespace toruslab
