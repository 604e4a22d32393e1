#include "toruslab/verify.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "toruslab/atom_space.hpp"
#include "toruslab/binomial.hpp"
#include "toruslab/bounds.hpp"
#include "toruslab/errors.hpp"
#include "toruslab/maximal.hpp"
#include "toruslab/oracle.hpp"
#include "toruslab/rational.hpp"
#include "toruslab/rubio_basis.hpp"

namespace toruslab {
namespace {

using Clock = std::chrono::steady_clock;

std::string fmtstr(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Accumulates pass/fail counts; only the first failure message is kept (and
// only formatted when actually failing, so hot loops stay cheap).
struct Suite {
  std::string name;
  Clock::time_point t0 = Clock::now();
  long checks = 0;
  long failures = 0;
  std::string first_failure;
  std::string note;

  void req(bool ok, const char* what) {
    ++checks;
    if (!ok && failures++ == 0) first_failure = what;
  }
  template <class... Args>
  void reqf(bool ok, const char* f, Args... args) {
    ++checks;
    if (!ok && failures++ == 0) first_failure = fmtstr(f, args...);
  }

  CheckResult result() const {
    CheckResult r;
    r.name = name;
    r.pass = failures == 0;
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (failures)
      r.detail = fmtstr("%ld/%ld checks failed; first: %s", failures, checks, first_failure.c_str());
    else if (note.empty())
      r.detail = fmtstr("%ld checks", checks);
    else
      r.detail = note + fmtstr(" [%ld checks]", checks);
    return r;
  }
};

CheckResult run_suite(const char* name, const std::function<void(Suite&)>& body) {
  Suite s;
  s.name = name;
  try {
    body(s);
  } catch (const std::exception& e) {
    ++s.checks;
    if (s.failures++ == 0) s.first_failure = std::string("exception: ") + e.what();
  }
  return s.result();
}

void record(ConstantSink* sink, const char* key, double v) {
  if (sink) sink->emplace_back(key, v);
}

// Index-sharded worker pool; bodies must do their own exception capture.
template <class Body>
void parallel_for(long n, int threads, const Body& body) {
  threads = static_cast<int>(std::min<long>(std::max(1, threads), n));
  if (threads <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Shared parameter grids: eps = 2^-1..2^-10, d = 1..2^20 log-spaced, the
// self-dual p set {4/3, 2, 4}.  The refined variants interleave midpoints
// (eps = 3*2^-k, d = round(2^(j+1/2))).
// ---------------------------------------------------------------------------

std::vector<Rational> eps_grid_base(bool full) {
  std::vector<Rational> v;
  if (full)
    for (int k = 1; k <= 10; ++k) v.push_back(Rational::pow2(-k));
  else
    for (int k : {1, 4, 10}) v.push_back(Rational::pow2(-k));
  return v;
}

std::vector<Rational> eps_grid_mid(bool full) {
  std::vector<Rational> v;
  if (full)
    for (int k = 3; k <= 11; ++k) v.push_back(Rational(3) * Rational::pow2(-k));
  else
    v.push_back(Rational(3, 16));
  return v;
}

std::vector<long> d_grid_base(bool full) {
  std::vector<long> v;
  if (full)
    for (int j = 0; j <= 20; ++j) v.push_back(1L << j);
  else
    v = {1, 16, 1024, 131072};
  return v;
}

std::vector<long> d_grid_mid(bool full) {
  std::vector<long> v;
  if (full)
    for (int j = 1; j <= 19; ++j) v.push_back(std::llround(std::pow(2.0, j + 0.5)));
  else
    v = {3, 181, 11585};
  return v;
}

std::vector<double> p_grid() { return {4.0 / 3.0, 2.0, 4.0}; }

Rational default_q0(long d) { return Rational(1, 2 * (d + 1)); }

Rational witness_level(const Rational& v) {
  static const Rational scale((1L << 40) - 1, 1L << 40);
  return v * scale;
}

// ---------------------------------------------------------------------------
// 1. Exact identities, rational mode, zero tolerance.
// ---------------------------------------------------------------------------

// Mass of Q0 intersected with all Qk, k in E: sum the inner atoms whose mask
// contains E (superset walk over the complement).
Rational q0_intersection_mass(const std::vector<Rational>& class_atom, long d, std::uint64_t E) {
  const std::uint64_t comp = ((std::uint64_t{1} << d) - 1) & ~E;
  Rational acc(0);
  std::uint64_t sub = comp;
  while (true) {
    acc += class_atom[static_cast<std::size_t>(std::popcount(E | sub))];
    if (sub == 0) break;
    sub = (sub - 1) & comp;
  }
  return acc;
}

void exact_identities_one(Suite& s, const Rational& eps, long d) {
  const AtomSpace space = build_atom_space(eps, d, default_q0(d));
  const Rational q0 = space.q0_measure();
  const Rational one_minus = Rational(1) - eps;

  // Partition of unity over every slot.
  Rational total(0);
  for (std::size_t i = 0; i < space.slot_count(); ++i) total += space.slot_total_measure(i);
  s.reqf(total == Rational(1), "partition sum != 1 at d=%ld", d);

  std::vector<Rational> class_atom;
  for (long j = 0; j <= d; ++j) class_atom.push_back(space.inner_class_atom_measure(j));

  // Independence inside Q0: |Q0 cap (cap_{k in E} Qk)| = eps^|E| q0 for every E.
  long bad = 0;
  std::vector<Rational> eps_pow{Rational(1)};
  for (long j = 1; j <= d; ++j) eps_pow.push_back(eps_pow.back() * eps);
  for (std::uint64_t E = 0; E < (std::uint64_t{1} << d); ++E) {
    const Rational want = eps_pow[static_cast<std::size_t>(std::popcount(E))] * q0;
    if (q0_intersection_mass(class_atom, d, E) != want) ++bad;
  }
  s.reqf(bad == 0, "%ld intersection masses off at d=%ld", bad, d);

  // |Qk| = |Q0 cap Qk| + slab = q0, so the family total is d*q0.
  Rational family_total(0);
  for (long k = 1; k <= d; ++k) {
    const Rational qk =
        q0_intersection_mass(class_atom, d, std::uint64_t{1} << (k - 1)) + space.slab_measure();
    s.reqf(qk == q0, "|Q_%ld| != |Q0| at d=%ld", k, d);
    family_total += qk;
  }
  s.reqf(family_total == Rational(static_cast<long>(d)) * q0, "sum |Qk| != d q0 at d=%ld", d);

  // Shadow closed form and its d/2 lower bound.
  const Rational sh = shadow_measure(space);
  const Rational sh_direct =
      q0 * (Rational(d) * one_minus + Rational(1) - one_minus.pow(static_cast<unsigned long>(d)));
  s.reqf(sh == sh_direct, "shadow closed form off at d=%ld", d);
  s.reqf(Rational(2) * sh >= Rational(d) * q0, "shadow below d/2 q0 at d=%ld", d);
}

void exp_moment_identities(Suite& s, const Rational& eps, long d, bool symmetric) {
  const AtomSpace space = build_atom_space(eps, d, default_q0(d), symmetric);
  for (const Rational& lambda : {Rational(7, 5), Rational(2), Rational(1, 3)}) {
    const Rational got = exp_moment_atom_sum(space, lambda);
    const Rational base = Rational(1) + (lambda - Rational(1)) * eps;
    const Rational want = space.q0_measure() * base.pow(static_cast<unsigned long>(d));
    s.reqf(got == want, "exp moment sum off at d=%ld sym=%d", d, symmetric ? 1 : 0);
  }
}

CheckResult check_exact_identities_impl() {
  return run_suite("exact-identities", [](Suite& s) {
    const Rational epses[] = {Rational(1, 2), Rational(1, 3), Rational(2, 5)};
    for (const Rational& eps : epses)
      for (long d = 1; d <= 10; ++d) exact_identities_one(s, eps, d);
    // The full-subset sweep at the top of the exact range.
    exact_identities_one(s, Rational(1, 3), 11);
    exact_identities_one(s, Rational(1, 3), 12);

    // Exponential moment by true per-atom sum at d = 12 (4096 atoms)...
    {
      const long d = 12;
      const AtomSpace space = build_atom_space(Rational(1, 4), d, default_q0(d));
      std::vector<Rational> class_atom;
      for (long j = 0; j <= d; ++j) class_atom.push_back(space.inner_class_atom_measure(j));
      const Rational lambda(7, 5);
      std::vector<Rational> lampow{Rational(1)};
      for (long j = 1; j <= d; ++j) lampow.push_back(lampow.back() * lambda);
      Rational brute(0);
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
        const auto j = static_cast<std::size_t>(std::popcount(mask));
        brute += lampow[j] * class_atom[j];
      }
      s.req(brute == exp_moment_atom_sum(space, lambda), "per-atom exp moment != class sum");
    }
    // ... and the class-grouped closed form up to d = 24, both storage modes.
    for (long d : {24L, 17L}) {
      exp_moment_identities(s, Rational(1, 4), d, false);
      exp_moment_identities(s, Rational(1, 4), d, true);
      exp_moment_identities(s, Rational(2, 5), d, false);
    }
    exp_moment_identities(s, Rational(1, 3), 40, true);
  });
}

// ---------------------------------------------------------------------------
// 2. Grid oracle vs atom algebra, exact equality end to end.
// ---------------------------------------------------------------------------

void oracle_measures_agree(Suite& s, const GridModel& grid, const AtomSpace& space) {
  const long d = grid.cfg.d;
  const Rational q0 = space.q0_measure();
  const Rational eps = space.eps();
  const OracleMeasures om = oracle_measures(grid);

  s.req(om.q0 == q0, "oracle |Q0| off");
  s.req(om.pair_outside_q0 == Rational(0), "slabs not disjoint");
  s.req(om.shadow == shadow_measure(space), "oracle shadow off");
  s.req(om.remainder == space.remainder_measure(), "oracle remainder off");
  s.req(om.covered == Rational(1) - space.remainder_measure(), "oracle covered off");
  for (long k = 1; k <= d; ++k) {
    s.reqf(om.qk[static_cast<std::size_t>(k)] == q0, "oracle |Q_%ld| off", k);
    s.reqf(om.q0_and_qk[static_cast<std::size_t>(k)] == eps * q0, "oracle |Q0 cap Q_%ld| off", k);
    s.reqf(om.slab[static_cast<std::size_t>(k)] == space.slab_measure(), "oracle slab %ld off", k);
    for (long j = 1; j <= d; ++j) {
      if (j == k) continue;
      s.reqf(om.pairwise[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] == eps * eps * q0,
             "oracle |Q_%ld cap Q_%ld| off", j, k);
    }
  }
  long bad = 0;
  for (long j = 0; j <= d; ++j)
    if (om.inner_class[static_cast<std::size_t>(j)] !=
        space.inner_class_atom_measure(j) * Rational::binom(d, j))
      ++bad;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask)
    if (om.inner_by_mask[static_cast<std::size_t>(mask)] !=
        space.inner_class_atom_measure(std::popcount(mask)))
      ++bad;
  s.reqf(bad == 0, "%ld oracle atom masses off", bad);
}

void oracle_function_agrees(Suite& s, const GridModel& grid, const AtomSpace& space,
                            const StepFunction& f) {
  const long d = grid.cfg.d;
  const MaximalResult mr = apply_maximal(f);

  for (long k = 1; k <= d; ++k)
    s.reqf(oracle_average(grid, f, k) == mr.averages_exact[static_cast<std::size_t>(k - 1)],
           "oracle average %ld off", k);
  s.req(oracle_box_integral(grid, f, 0) == integrate(f, indicator_q0(space)),
        "oracle Q0 integral off");

  // Levels: attained values exactly (strict-inequality boundary) and just
  // below them, plus fixed interior levels.
  std::set<Rational> attained;
  for (std::size_t i = 0; i < space.slot_count(); ++i) {
    const Rational v = mr.mf.slot_exact(i);
    if (v.sign() > 0) attained.insert(v);
  }
  std::vector<Rational> levels{Rational(0), Rational(1, 3)};
  int picked = 0;
  for (auto it = attained.rbegin(); it != attained.rend() && picked < 3; ++it, ++picked) {
    levels.push_back(*it);
    levels.push_back(witness_level(*it));
  }
  for (const Rational& lam : levels)
    s.req(superlevel_measure(mr.mf, lam) == oracle_maximal_superlevel(grid, f, lam),
          "oracle superlevel off");
}

CheckResult check_oracle_equivalence_impl() {
  return run_suite("oracle-equivalence", [](Suite& s) {
    std::mt19937_64 rng(0x5eed0002ULL);
    for (long d : {1L, 2L, 3L, 4L}) {
      for (const Rational& eps : {Rational(1, 2), Rational(1, 4), Rational(1, 8)}) {
        ConfigSpec cfg = make_config(eps, d);
        const AtomSpace space = config_to_atom_space(cfg);
        for (int trial = 0; trial < 4; ++trial) {
          if (trial == 3) {
            // Deterministic worst case: every box pushed across the wrap.
            for (std::size_t i = 0; i < cfg.translation.size(); ++i) {
              const long n = 1L << cfg.exponents[i];
              cfg.translation[i] = Rational(n - 1, n);
            }
          } else if (trial > 0) {
            for (std::size_t i = 0; i < cfg.translation.size(); ++i) {
              const long n = 1L << cfg.exponents[i];
              cfg.translation[i] = Rational(static_cast<long>(rng() % static_cast<std::uint64_t>(n)), n);
            }
          }
          const GridModel grid = build_grid(cfg);
          oracle_measures_agree(s, grid, space);

          std::vector<StepFunction> fns;
          fns.push_back(indicator_q0(space));
          fns.push_back(height_function(space));
          fns.push_back(extremal_function(space, ExtremalKind::single, 2.0));
          StepFunction f = StepFunction::zeros(space, NumericMode::exact);
          for (std::size_t i = 0; i < space.slot_count(); ++i)
            f.set_slot(i, Rational(static_cast<long>(rng() % 8), 8));
          fns.push_back(std::move(f));
          for (const StepFunction& g : fns) oracle_function_agrees(s, grid, space, g);
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// 3. Closed-form eta against its defining equation, plus bisection.
// ---------------------------------------------------------------------------

CheckResult check_eta_equation_impl(bool full) {
  return run_suite("eta-equation", [full](Suite& s) {
    const auto epses = eps_grid_base(full);
    const auto ds = d_grid_base(full);
    const auto ps = p_grid();  // used as the q grid (self-dual set)
    double max_res = 0.0;
    long bad = 0;
    for (const Rational& eps : epses)
      for (long d : ds)
        for (double q : ps) {
          const double eta = latala_eta(eps, d, q);
          const double res = std::fabs(latala_eta_residual(eps, d, q, eta));
          max_res = std::max(max_res, res);
          if (!(res <= 1e-12) || !std::isfinite(eta) || eta <= 0.0) ++bad;
        }
    s.reqf(bad == 0, "%ld grid points with residual > 1e-12 (max %.3g)", bad, max_res);

    const double spot = latala_eta_bisect(Rational(1, 2), 1, 2.0);
    s.reqf(std::fabs(spot - 0.368747) <= 1e-5, "bisection spot value %.8f", spot);
    s.reqf(std::fabs(latala_eta(Rational(1, 2), 1, 2.0) - spot) <= 1e-9 * spot,
           "closed form vs bisection at the spot: %.3g",
           std::fabs(latala_eta(Rational(1, 2), 1, 2.0) - spot));

    // Bisection agreement on a subsample of the grid.
    long step = 0;
    for (const Rational& eps : epses)
      for (long d : ds)
        for (double q : ps) {
          if (step++ % 17 != 0) continue;
          const double a = latala_eta(eps, d, q);
          const double b = latala_eta_bisect(eps, d, q);
          s.reqf(std::fabs(a / b - 1.0) <= 1e-9, "closed/bisect ratio %.12f off at d=%ld", a / b, d);
        }
    s.note = fmtstr("max residual %.3g", max_res);
  });
}

// ---------------------------------------------------------------------------
// 4. Sandwich and conformance band across the regime grid.
// ---------------------------------------------------------------------------

CheckResult check_regime_conformance_impl(bool full, int threads, ConstantSink* sink) {
  return run_suite("regime-conformance", [=](Suite& s) {
    struct EpsEntry {
      Rational eps;
      bool base;
    };
    std::vector<EpsEntry> epses;
    for (const Rational& e : eps_grid_base(full)) epses.push_back({e, true});
    for (const Rational& e : eps_grid_mid(full)) epses.push_back({e, false});
    std::vector<std::pair<long, bool>> ds;
    for (long d : d_grid_base(full)) ds.emplace_back(d, true);
    for (long d : d_grid_mid(full)) ds.emplace_back(d, false);
    std::sort(ds.begin(), ds.end());
    const auto ps = p_grid();
    const std::size_t NE = epses.size(), ND = ds.size(), NP = ps.size();

    std::vector<long> all_d;
    for (const auto& e : ds) all_d.push_back(e.first);

    // Certified upper bounds share one d'-scan per (eps, p) curve.
    std::vector<std::vector<double>> uppers(NE * NP);
    std::vector<std::string> errs(NE * NP);
    parallel_for(static_cast<long>(NE * NP), threads, [&](long t) {
      const auto ei = static_cast<std::size_t>(t) / NP, pi = static_cast<std::size_t>(t) % NP;
      try {
        uppers[static_cast<std::size_t>(t)] = upper_bound_weak_norm_batch(epses[ei].eps, ps[pi], all_d);
      } catch (const std::exception& e) {
        errs[static_cast<std::size_t>(t)] = e.what();
      }
    });

    std::vector<double> lowers(NE * ND * NP, 0.0);
    std::vector<std::string> errs2(NE * ND);
    parallel_for(static_cast<long>(NE * ND), threads, [&](long t) {
      const auto ei = static_cast<std::size_t>(t) / ND, di = static_cast<std::size_t>(t) % ND;
      try {
        const AtomSpace space =
            build_atom_space(epses[ei].eps, ds[di].first, default_q0(ds[di].first), true);
        for (std::size_t pi = 0; pi < NP; ++pi)
          lowers[(ei * ND + di) * NP + pi] = lower_bound_weak_norm(space, ps[pi]);
      } catch (const std::exception& e) {
        errs2[ei * ND + di] = e.what();
      }
    });

    for (const auto& e : errs)
      if (!e.empty()) s.reqf(false, "upper-bound task failed: %s", e.c_str());
    for (const auto& e : errs2)
      if (!e.empty()) s.reqf(false, "lower-bound task failed: %s", e.c_str());
    if (s.failures) return;

    double blo = 1e300, bhi = 0.0, rlo = 1e300, rhi = 0.0;
    long sandwich_bad = 0, nonfinite = 0;
    for (std::size_t ei = 0; ei < NE; ++ei)
      for (std::size_t di = 0; di < ND; ++di)
        for (std::size_t pi = 0; pi < NP; ++pi) {
          const double lower = lowers[(ei * ND + di) * NP + pi];
          const double upper = uppers[ei * NP + pi][di];
          const double A = a_p(epses[ei].eps, ds[di].first, ps[pi]);
          const double B = classify_regime(A, ps[pi]).B;
          if (!(std::isfinite(lower) && std::isfinite(upper) && B > 0.0)) {
            ++nonfinite;
            continue;
          }
          if (!(lower <= upper * (1.0 + 1e-12))) ++sandwich_bad;
          const double rl = lower / B, ru = upper / B;
          const bool base = epses[ei].base && ds[di].second;
          double& lo = base ? blo : rlo;
          double& hi = base ? bhi : rhi;
          lo = std::min(lo, std::min(rl, ru));
          hi = std::max(hi, std::max(rl, ru));
        }
    s.reqf(nonfinite == 0, "%ld non-finite grid points", nonfinite);
    s.reqf(sandwich_bad == 0, "%ld points with lower > upper", sandwich_bad);
    s.req(blo > 0.0 && bhi < 1e300, "degenerate band");

    const double K1 = 1.0 / blo, K2 = bhi;
    s.reqf(K1 * K2 <= 1e3, "band ceiling exceeded: K1*K2 = %.6g", K1 * K2);
    // Refinement stability: the midpoint grid stays inside the base band.
    s.reqf(rlo >= blo * (1.0 - 1e-9), "refined grid widens band below: %.12g < %.12g", rlo, blo);
    s.reqf(rhi <= bhi * (1.0 + 1e-9), "refined grid widens band above: %.12g > %.12g", rhi, bhi);

    record(sink, "conformance_K1", K1);
    record(sink, "conformance_K2", K2);
    record(sink, "conformance_K1K2", K1 * K2);
    record(sink, "conformance_band_lo", blo);
    record(sink, "conformance_band_hi", bhi);
    record(sink, "conformance_refined_lo", rlo);
    record(sink, "conformance_refined_hi", rhi);
    s.note = fmtstr("K1=%.4g K2=%.4g K1*K2=%.4g over %zu pts", K1, K2, K1 * K2, NE * ND * NP);
  });
}

// ---------------------------------------------------------------------------
// 5. Display-formula cases and monotonicity.
// ---------------------------------------------------------------------------

CheckResult check_rq_cases_impl() {
  return run_suite("rq-cases", [](Suite& s) {
    for (double p : p_grid()) {
      const double q = p / (p - 1.0);
      const double a_lo = q * std::exp(-q);  // below: flat case
      const double a_hi = q / std::exp(1.0); // above: linear case

      for (double f : {0.05, 0.3, 1.0}) {
        const double A = a_lo * f;
        const double v = simplified_rq(A, q, RqBranch::srq);
        s.reqf(v <= 10.0 && v > 0.0, "flat-case srq=%.4g at A=%.4g q=%.4g", v, A, q);
      }
      for (double f : {1.0, 2.0, 10.0, 100.0}) {
        const double A = a_hi * f;
        const double v = simplified_rq(A, q, RqBranch::srq) / A;
        s.reqf(v >= 0.1 && v <= 10.0, "linear-case srq/A=%.4g at q=%.4g", v, q);
        const double v2 = simplified_rq(A, q, RqBranch::srq2) / A;
        s.reqf(v2 >= 0.1 && v2 <= 10.0, "linear-case srq2/A=%.4g at q=%.4g", v2, q);
      }
      for (int i = 0; i <= 4; ++i) {
        const double t = i / 4.0;
        const double A = std::exp((1.0 - t) * std::log(a_lo * 1.05) + t * std::log(a_hi * 0.95));
        const double v = simplified_rq(A, q, RqBranch::srq) * std::log(q / A) / q;
        s.reqf(v >= 0.1 && v <= 10.0, "log-case scaled srq=%.4g at A=%.4g q=%.4g", v, A, q);
      }

      // rq1 nondecreasing on d in [1, q]; rq2 nonincreasing on [q, inf).
      for (double A : {0.05, 0.5, 5.0}) {
        double prev = -1.0;
        for (int i = 0; i <= 16; ++i) {
          const double d = std::exp(i / 16.0 * std::log(q));  // 1 .. q
          const double v = simplified_rq(A, q, RqBranch::rq1, d);
          s.reqf(prev <= v * (1.0 + 1e-12), "rq1 not increasing at d=%.4g A=%.4g q=%.4g", d, A, q);
          prev = v;
        }
        prev = 1e300;
        for (int i = 0; i <= 16; ++i) {
          const double d = q * std::exp(i / 16.0 * std::log(1000.0));  // q .. 1000q
          const double v = simplified_rq(A, q, RqBranch::rq2, d);
          s.reqf(prev >= v * (1.0 - 1e-12), "rq2 not decreasing at d=%.4g A=%.4g q=%.4g", d, A, q);
          prev = v;
        }
        // Both branches meet the simplified form at d = q up to fixed factors.
        const double v0 = simplified_rq(A, q, RqBranch::srq);
        const double r1 = simplified_rq(A, q, RqBranch::rq1, q) / v0;
        const double r2 = simplified_rq(A, q, RqBranch::rq2, q) / v0;
        s.reqf(r1 >= 0.1 && r1 <= 10.0, "rq1(q)/srq=%.4g at A=%.4g q=%.4g", r1, A, q);
        s.reqf(r2 >= 0.1 && r2 <= 10.0, "rq2(q)/srq=%.4g at A=%.4g q=%.4g", r2, A, q);
      }
    }

    // The exact-model quantity d^(-1/q) eta tracks the display branches.
    for (const Rational& eps : {Rational(1, 2), Rational(1, 32)})
      for (long d : {1L, 2L, 8L, 64L, 1024L})
        for (double p : p_grid()) {
          const double q = p / (p - 1.0);
          const double A = a_p(eps, d, p);
          const double model = relevant_quantity(eps, d, p);
          const RqBranch br = (static_cast<double>(d) <= q) ? RqBranch::rq1 : RqBranch::rq2;
          const double disp = simplified_rq(A, q, br, static_cast<double>(d));
          const double r = model / disp;
          s.reqf(r >= 0.1 && r <= 10.0, "model/display=%.4g at d=%ld p=%.4g", r, d, p);
        }

    bool threw = false;
    try {
      rq_branch_from_string("nonsense");
    } catch (const BranchUnknown&) {
      threw = true;
    }
    s.req(threw, "rq_branch_from_string accepted junk");
  });
}

// ---------------------------------------------------------------------------
// 6. Endpoint machinery: moment chain, corpus ratios, sharpness witnesses.
// ---------------------------------------------------------------------------

constexpr double kEndpointCorpusCeiling = 10.0;
constexpr double kSharpnessCeiling = 100.0;  // K3

struct EndpointCfgResult {
  double max_ratio = 0.0;
  double best_sharp = 0.0;
  long bad = 0;
  double bad_val = 0.0;
  std::string err;
};

EndpointCfgResult endpoint_corpus_one(const Rational& eps, long d, bool symmetric,
                                      std::uint64_t seed) {
  EndpointCfgResult out;
  const AtomSpace space = build_atom_space(eps, d, default_q0(d), symmetric);
  const double A = endpoint_machinery(eps, d).A;
  const double eps_f = eps.to_double();

  auto track = [&](double r) {
    if (!(r <= kEndpointCorpusCeiling) || !std::isfinite(r)) {
      if (out.bad++ == 0) out.bad_val = r;
    }
    out.max_ratio = std::max(out.max_ratio, r);
  };

  // Designed sharpness pair: 1_{Q0} at lambda = eps/2, 1_{Q1} at lambda = 1/2.
  const double r_center = endpoint_upper_check(indicator_q0(space), eps_f / 2.0);
  track(r_center);
  out.best_sharp = r_center * (1.0 + A);
  if (!symmetric) {
    const double r_single =
        endpoint_upper_check(extremal_function(space, ExtremalKind::single, 2.0), 0.5);
    track(r_single);
    out.best_sharp = std::max(out.best_sharp, r_single * (1.0 + A));
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> span(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    StepFunction f = StepFunction::zeros(space, NumericMode::binary64);
    for (std::size_t i = 0; i < space.slot_count(); ++i) {
      const bool zero = (rng() & 3) == 0;
      const double u = span(rng);  // drawn unconditionally: keeps the stream aligned
      f.set_slot(i, zero ? 0.0 : std::exp(u));
    }
    const MaximalResult mr = apply_maximal(f);
    double vmax = 0.0;
    for (std::size_t i = 0; i < space.slot_count(); ++i) vmax = std::max(vmax, mr.mf.slot_f64(i));
    std::vector<double> lambdas{eps_f / 2.0};
    if (vmax > 0.0) {
      lambdas.push_back(vmax * kWitnessLevelScale);
      lambdas.push_back(vmax / 2.0);
      lambdas.push_back(vmax / 16.0);
    }
    for (double lam : lambdas) {
      const double num = superlevel_measure_f64(mr.mf, lam);
      const double den = (1.0 + A) * llogl_functional(f, lam);
      track(den > 0.0 ? num / den : 0.0);
    }
  }
  return out;
}

CheckResult check_endpoint_impl(bool full, int threads, ConstantSink* sink) {
  return run_suite("endpoint-llogl", [=](Suite& s) {
    // Exponential moment chain on the parameter grid, exact inequalities.
    for (const Rational& eps : eps_grid_base(full))
      for (long d : d_grid_base(full)) {
        const EndpointReport ep = endpoint_machinery(eps, d);
        s.reqf(ep.expmoment <= ep.expmoment_upper && ep.expmoment_upper <= ep.inv_eps,
               "moment chain broken at d=%ld", d);
        // Lambda - 1 = 1/(1+A); subtracting the stored 1 back out loses
        // precision once A is large, so reproduce the expression instead.
        s.reqf(ep.Lambda == 1.0 + 1.0 / (1.0 + ep.A),
               "Lambda normalization off at d=%ld", d);
        s.req(ep.c > 0.0 && std::isfinite(ep.c), "c not positive");
      }

    // L log L closed values for the designed witnesses.
    {
      const AtomSpace space = build_atom_space(Rational(1, 4), 8, default_q0(8));
      const Rational q0 = space.q0_measure();
      const double I1 = llogl_functional(extremal_function(space, ExtremalKind::single, 2.0), 0.5);
      const double want1 = 2.0 * std::log(std::exp(1.0) + 2.0) * q0.to_double();
      s.reqf(std::fabs(I1 / want1 - 1.0) <= 1e-12, "llogl(1_Q1, 1/2) = %.12g", I1);
      const double I0 = llogl_functional(indicator_q0(space), 0.125);
      const double want0 = 8.0 * std::log(std::exp(1.0) + 8.0) * q0.to_double();
      s.reqf(std::fabs(I0 / want0 - 1.0) <= 1e-12, "llogl(1_Q0, eps/2) = %.12g", I0);
      bool threw = false;
      try {
        endpoint_upper_check(StepFunction::zeros(space, NumericMode::exact), 0.5);
      } catch (const DivisionByZero&) {
        threw = true;
      }
      s.req(threw, "endpoint ratio accepted f = 0");
    }

    // Corpus: both designed witnesses plus 100 random step functions per
    // configuration, up to d = 20.
    struct Cfg {
      Rational eps;
      long d;
      bool sym;
    };
    std::vector<Cfg> cfgs;
    const std::vector<long> dlist = full ? std::vector<long>{1, 2, 3, 4, 6, 8, 12, 16}
                                         : std::vector<long>{1, 3, 8};
    for (int k = 1; k <= 5; ++k) {
      for (long d : dlist) cfgs.push_back({Rational::pow2(-k), d, false});
      cfgs.push_back({Rational::pow2(-k), 20, true});
    }
    std::vector<EndpointCfgResult> res(cfgs.size());
    parallel_for(static_cast<long>(cfgs.size()), threads, [&](long i) {
      const Cfg& c = cfgs[static_cast<std::size_t>(i)];
      try {
        res[static_cast<std::size_t>(i)] =
            endpoint_corpus_one(c.eps, c.d, c.sym, 0x6e0dull * 131 + static_cast<std::uint64_t>(i));
      } catch (const std::exception& e) {
        res[static_cast<std::size_t>(i)].err = e.what();
      }
    });

    double corpus_max = 0.0, worst_sharp = 1e300;
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      const auto& r = res[i];
      if (!r.err.empty()) {
        s.reqf(false, "corpus config %zu failed: %s", i, r.err.c_str());
        continue;
      }
      s.reqf(r.bad == 0, "%ld corpus ratios above %.3g (first %.6g) at d=%ld", r.bad,
             kEndpointCorpusCeiling, r.bad_val, cfgs[i].d);
      corpus_max = std::max(corpus_max, r.max_ratio);
      worst_sharp = std::min(worst_sharp, r.best_sharp);
    }
    const double K3 = 1.0 / worst_sharp;
    s.reqf(K3 <= kSharpnessCeiling, "sharpness constant K3 = %.6g above ceiling", K3);

    record(sink, "endpoint_corpus_max", corpus_max);
    record(sink, "endpoint_K3", K3);
    s.note = fmtstr("corpus max ratio %.4g, K3 = %.4g over %zu configs", corpus_max, K3, cfgs.size());
  });
}

// ---------------------------------------------------------------------------
// 7. Configuration families along the corollary rules.
// ---------------------------------------------------------------------------

CheckResult check_families_impl() {
  return run_suite("families", [](Suite& s) {
    const auto closed = corollary_family(FamilyRule::closed, 2.0, 10000);
    const FamilyReport rep = family_analysis(closed, {2.0, 1.5});
    const std::vector<long> want_cp{10, 100, 1000, 10000};
    s.req(rep.checkpoints == want_cp, "checkpoint ladder off");
    s.reqf(std::fabs(rep.sup_d - 1e8) <= 0.5, "sup_d = %.6g", rep.sup_d);

    const FamilyTrajectory& at2 = rep.per_p[0];
    s.reqf(at2.sup_at_checkpoint.back() <= 2.0, "closed family sup A_2 = %.6g",
           at2.sup_at_checkpoint.back());
    s.req(!at2.divergent, "closed family flagged divergent at p = p0");

    const FamilyTrajectory& at15 = rep.per_p[1];
    const auto& tr = at15.sup_at_checkpoint;
    s.req(tr.size() == 4, "trajectory length off");
    for (std::size_t i = 1; i < tr.size(); ++i)
      s.reqf(tr[i] > tr[i - 1], "sup not increasing at checkpoint %zu", i);
    s.reqf(tr.back() >= 1.5 * tr[tr.size() - 2], "final decade growth only %.4g",
           tr.back() / tr[tr.size() - 2]);
    s.reqf(tr.back() >= 10.0, "sup A_1.5 = %.6g after 10^4 members", tr.back());
    s.req(at15.divergent, "closed family not flagged divergent below p0");

    const auto open = corollary_family(FamilyRule::open, 2.0, 10000);
    const FamilyReport rep2 = family_analysis(open, {2.0});
    const auto& tro = rep2.per_p[0].sup_at_checkpoint;
    for (std::size_t i = 1; i < tro.size(); ++i)
      s.reqf(tro[i] > tro[i - 1], "open family sup not increasing at %zu", i);
    s.req(rep2.per_p[0].divergent, "open family not flagged divergent at p0");

    const FamilyReport single = family_analysis({{Rational(1, 2), 4}}, {2.0});
    s.req(single.checkpoints == std::vector<long>{1}, "single-member checkpoints off");
    s.reqf(std::fabs(single.per_p[0].sup_at_checkpoint.back() - 1.0) <= 1e-15,
           "single-member sup = %.12g", single.per_p[0].sup_at_checkpoint.back());
    s.req(!single.per_p[0].divergent, "single member flagged divergent");

    bool threw = false;
    try {
      family_analysis({}, {2.0});
    } catch (const EmptyFamily&) {
      threw = true;
    }
    s.req(threw, "empty family accepted");
  });
}

// ---------------------------------------------------------------------------
// 8. Basis-level table and continuation structure.
// ---------------------------------------------------------------------------

CheckResult check_basis_table_impl() {
  return run_suite("basis-table", [](Suite& s) {
    const std::vector<std::vector<int>> rows{
        {1},          {1, 1},       {2, 1},       {2, 2},       {2, 2, 1},
        {2, 2, 2},    {3, 2, 2},    {3, 3, 2},    {3, 3, 3},    {3, 3, 3, 1}};
    for (long m = 1; m <= 10; ++m) {
      const BasisLevel lv = basis_level(m);
      s.reqf(lv.exponents == rows[static_cast<std::size_t>(m - 1)], "level %ld row mismatch", m);
      s.reqf(lv.measure() == Rational::pow2(static_cast<int>(-m)), "level %ld measure off", m);
    }

    long prev_coords = 0;
    for (long m = 1; m <= 300; ++m) {
      const BasisLevel lv = basis_level(m);
      long sum = 0;
      bool sorted = true;
      for (std::size_t i = 0; i < lv.exponents.size(); ++i) {
        sum += lv.exponents[i];
        if (i && lv.exponents[i] > lv.exponents[i - 1]) sorted = false;
      }
      s.reqf(sum == m, "level %ld exponent sum %ld", m, sum);
      s.reqf(sorted, "level %ld exponents not nonincreasing", m);
      s.reqf(lv.coords() >= prev_coords && lv.coords() <= prev_coords + 1,
             "level %ld coordinate count jumps", m);
      // Halving: measure of level m is exactly half of level m-1.
      if (m > 1)
        s.reqf(lv.measure() * Rational(2) == basis_level(m - 1).measure(), "level %ld not halved", m);
      prev_coords = lv.coords();
    }

    for (long n = 1; n <= 20; ++n) {
      const long m = first_level_with_coords(n);
      s.reqf(basis_level(m).coords() >= n, "first_level_with_coords(%ld) too small", n);
      s.reqf(m == 1 || basis_level(m - 1).coords() < n, "first_level_with_coords(%ld) not minimal", n);
    }
  });
}

// ---------------------------------------------------------------------------
// Maximal-operator invariants (exact where the model is exact).
// ---------------------------------------------------------------------------

StepFunction random_exact_function(const AtomSpace& space, std::mt19937_64& rng) {
  StepFunction f = StepFunction::zeros(space, NumericMode::exact);
  for (std::size_t i = 0; i < space.slot_count(); ++i)
    f.set_slot(i, Rational(static_cast<long>(rng() % 9), 4));
  return f;
}

CheckResult check_maximal_invariants_impl() {
  return run_suite("maximal-invariants", [](Suite& s) {
    std::mt19937_64 rng(0x5eed0007ULL);
    struct SpaceSpec {
      Rational eps;
      long d;
      bool sym;
    };
    const SpaceSpec specs[] = {{Rational(1, 3), 3, false},
                               {Rational(2, 5), 4, false},
                               {Rational(1, 4), 6, false},
                               {Rational(1, 4), 40, true}};
    for (const auto& spec : specs) {
      const AtomSpace space = build_atom_space(spec.eps, spec.d, default_q0(spec.d), spec.sym);
      const std::size_t rem = space.slot_of(AtomId::remainder());

      for (int trial = 0; trial < 4; ++trial) {
        const StepFunction f = random_exact_function(space, rng);
        const StepFunction g = random_exact_function(space, rng);
        const MaximalResult mf = apply_maximal(f);
        const MaximalResult mg = apply_maximal(g);

        s.req(mf.mf.slot_exact(rem) == Rational(0), "Mf nonzero on remainder");
        s.req(mf.mf.nonnegative(), "Mf negative somewhere");

        // Positive homogeneity, exact.
        const Rational c(3, 2);
        const MaximalResult mcf = apply_maximal(c * f);
        long bad = 0;
        for (std::size_t i = 0; i < space.slot_count(); ++i)
          if (mcf.mf.slot_exact(i) != c * mf.mf.slot_exact(i)) ++bad;
        s.reqf(bad == 0, "%ld slots break homogeneity at d=%ld", bad, spec.d);

        // Sublinearity, exact and slotwise.
        const MaximalResult msum = apply_maximal(f + g);
        bad = 0;
        for (std::size_t i = 0; i < space.slot_count(); ++i)
          if (msum.mf.slot_exact(i) > mf.mf.slot_exact(i) + mg.mf.slot_exact(i)) ++bad;
        s.reqf(bad == 0, "%ld slots break sublinearity at d=%ld", bad, spec.d);

        // Superlevel monotonicity in lambda, plus the closed-vs-open step.
        Rational vmax(0);
        for (std::size_t i = 0; i < space.slot_count(); ++i)
          vmax = max(vmax, mf.mf.slot_exact(i));
        if (vmax.sign() > 0) {
          const Rational lam1 = vmax / Rational(4), lam2 = vmax / Rational(2);
          s.req(superlevel_measure(mf.mf, lam1) >= superlevel_measure(mf.mf, lam2),
                "superlevel not monotone");
          s.req(superlevel_measure(mf.mf, witness_level(vmax)) >=
                    superlevel_measure(mf.mf, vmax),
                "witness level below attained level");
          s.req(superlevel_measure(mf.mf, vmax) == Rational(0), "strict superlevel at max not empty");
        }

        // Weak-norm scaling in binary64.
        const double wf = weak_lp_norm(mf.mf, 2.0);
        const double wcf = weak_lp_norm(mcf.mf, 2.0);
        s.reqf(std::fabs(wcf - 1.5 * wf) <= 1e-12 * std::max(1.0, wcf),
               "weak norm scaling off: %.12g vs %.12g", wcf, 1.5 * wf);
      }

      // Center and single averages have closed forms.
      {
        const MaximalResult m0 = apply_maximal(indicator_q0(space));
        long bad = 0;
        for (const Rational& a : m0.averages_exact)
          if (a != spec.eps) ++bad;
        s.reqf(bad == 0, "center averages != eps at d=%ld", spec.d);
        if (!spec.sym && spec.d >= 2) {
          const MaximalResult m1 =
              apply_maximal(extremal_function(space, ExtremalKind::single, 2.0));
          s.req(m1.averages_exact[0] == Rational(1), "single average on its own box != 1");
          bad = 0;
          for (std::size_t k = 1; k < m1.averages_exact.size(); ++k)
            if (m1.averages_exact[k] != spec.eps * spec.eps) ++bad;
          s.reqf(bad == 0, "single cross averages != eps^2 at d=%ld", spec.d);
        }
      }

      // The height profile equalizes every box average, exactly.
      {
        const MaximalResult mh = apply_maximal(height_function(space));
        long bad = 0;
        for (const Rational& a : mh.averages_exact)
          if (a != mh.averages_exact[0]) ++bad;
        s.reqf(bad == 0, "height averages unequal at d=%ld", spec.d);
      }
      for (double p : p_grid()) {
        const StepFunction fx = extremal_function(space, ExtremalKind::height, p);
        s.reqf(std::fabs(lp_norm(fx, p) - 1.0) <= 1e-9, "height witness norm %.12g at p=%.4g",
               lp_norm(fx, p), p);
        const MaximalResult mx = apply_maximal(fx);
        double lo = 1e300, hi = 0.0;
        for (double a : mx.averages) {
          lo = std::min(lo, a);
          hi = std::max(hi, a);
        }
        s.reqf(hi / lo - 1.0 <= 1e-9, "height averages spread %.3g at p=%.4g", hi / lo - 1.0, p);
      }
    }

    // Symmetric-space guardrail: per-atom inner writes are rejected.
    {
      const AtomSpace sym = build_atom_space(Rational(1, 4), 40, default_q0(40), true);
      StepFunction f = StepFunction::zeros(sym, NumericMode::exact);
      bool threw = false;
      try {
        f.set(AtomId::inner(0b11), Rational(1));
      } catch (const Error&) {
        threw = true;
      }
      s.req(threw, "symmetric storage accepted a per-atom write");
    }
  });
}

// ---------------------------------------------------------------------------
// Conditioning on the atom algebra is lossless for the maximal operator.
// ---------------------------------------------------------------------------

CheckResult check_conditioning_impl() {
  return run_suite("conditioning-oracle", [](Suite& s) {
    std::mt19937_64 rng(0x5eed000cULL);
    struct P {
      Rational eps;
      long d;
    };
    for (const P& pr : {P{Rational(1, 2), 2}, P{Rational(1, 4), 3}}) {
      const ConfigSpec cfg = make_config(pr.eps, pr.d);
      const GridModel grid = build_grid(cfg);
      const AtomSpace space = config_to_atom_space(cfg);
      const long d = pr.d;

      // Random cell-valued F; per-atom mass and square accumulators.
      std::vector<std::pair<std::vector<long>, Rational>> cells;  // (coords, F)
      std::vector<std::uint64_t> cell_mask;
      for_each_cell(grid, [&](const std::vector<long>& coords, std::uint64_t mask) {
        cells.emplace_back(coords, Rational(static_cast<long>(rng() % 16), 8));
        cell_mask.push_back(mask);
      });

      StepFunction cond = StepFunction::zeros(space, NumericMode::exact);
      {
        // Conditional expectation per atom: cell sums / atom measure.
        std::vector<Rational> acc(space.slot_count(), Rational(0));
        long classify_bad = 0;
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
          const std::uint64_t mask = cell_mask[ci];
          AtomId id = AtomId::remainder();
          if (mask & 1)
            id = AtomId::inner(mask >> 1);
          else if (mask != 0)
            id = AtomId::outer_slab(std::countr_zero(mask));
          const AtomId direct = oracle_classify_cell(grid, cells[ci].first);
          if (direct.kind != id.kind || direct.index != id.index) ++classify_bad;
          acc[space.slot_of(id)] += cells[ci].second * grid.cell;
        }
        s.reqf(classify_bad == 0, "%ld cells classified inconsistently", classify_bad);
        for (std::size_t i = 0; i < space.slot_count(); ++i)
          cond.set_slot(i, acc[i] / space.slot_total_measure(i));
      }

      // Box averages of F equal box averages of the conditioned function.
      const MaximalResult mc = apply_maximal(cond);
      std::vector<Rational> avg;
      for (long k = 1; k <= d; ++k) {
        Rational box_int(0);
        for (std::size_t ci = 0; ci < cells.size(); ++ci)
          if (cell_mask[ci] >> k & 1) box_int += cells[ci].second * grid.cell;
        const Rational a = box_int / cfg.q0_measure();
        avg.push_back(a);
        s.reqf(a == mc.averages_exact[static_cast<std::size_t>(k - 1)],
               "conditioned average %ld off", k);
      }

      // Superlevel sets of the cellwise maximal function match the atom model.
      for (const Rational& lam : {witness_level(avg[0]), pr.eps * Rational(1, 3)}) {
        Rational direct(0);
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
          Rational best(0);
          bool any = false;
          for (long k = 1; k <= d; ++k)
            if (cell_mask[ci] >> k & 1) {
              const Rational& a = avg[static_cast<std::size_t>(k - 1)];
              if (!any || best < a) best = a;
              any = true;
            }
          if (any && best > lam) direct += grid.cell;
        }
        s.req(direct == superlevel_measure(mc.mf, lam), "cellwise superlevel off");
      }

      // Conditioning contracts the L^2 mass (Jensen), exactly.
      Rational sq_cells(0);
      for (std::size_t ci = 0; ci < cells.size(); ++ci)
        sq_cells += cells[ci].second * cells[ci].second * grid.cell;
      s.req(integrate(cond, cond) <= sq_cells, "conditioning increased L2 mass");
    }
  });
}

// ---------------------------------------------------------------------------
// Latala-norm equivalence: moment^(1/q) / eta stays in a stable band.
// ---------------------------------------------------------------------------

CheckResult check_latala_equivalence_impl(bool full, ConstantSink* sink) {
  return run_suite("latala-equivalence", [=](Suite& s) {
    auto ratio_of = [](const Rational& eps, long d, double q) {
      const double mom = binom_q_moment(eps.to_double(), d, q);
      return std::pow(mom, 1.0 / q) / latala_eta(eps, d, q);
    };
    double lo = 1e300, hi = 0.0;
    for (const Rational& eps : eps_grid_base(full))
      for (long d : d_grid_base(full))
        for (double q : p_grid()) {
          const double r = ratio_of(eps, d, q);
          lo = std::min(lo, r);
          hi = std::max(hi, r);
        }
    s.req(lo > 0.0 && std::isfinite(hi), "degenerate ratio band");
    const double K = std::max(hi, 1.0 / lo);
    s.reqf(K <= 100.0, "equivalence constant K = %.6g implausibly large", K);

    double rlo = 1e300, rhi = 0.0;
    for (const Rational& eps : eps_grid_mid(full))
      for (long d : d_grid_mid(full))
        for (double q : p_grid()) {
          const double r = ratio_of(eps, d, q);
          rlo = std::min(rlo, r);
          rhi = std::max(rhi, r);
        }
    s.reqf(rlo >= lo * (1.0 - 1e-9), "refined grid widens ratio band below: %.12g < %.12g", rlo, lo);
    s.reqf(rhi <= hi * (1.0 + 1e-9), "refined grid widens ratio band above: %.12g > %.12g", rhi, hi);

    // Exact-rational moment cross-check for integer q.
    for (const Rational& eps : {Rational(1, 2), Rational(1, 8), Rational(3, 8)})
      for (long d : {1L, 2L, 7L, 64L, 1000L})
        for (long q : {1L, 2L, 4L}) {
          const double exact_val = binom_q_moment_exact(eps, d, q).to_double();
          const double win = binom_q_moment(eps.to_double(), d, static_cast<double>(q));
          s.reqf(std::fabs(win / exact_val - 1.0) <= 1e-12,
                 "windowed vs exact moment off by %.3g at d=%ld q=%ld", win / exact_val - 1.0, d, q);
        }

    record(sink, "latala_K", K);
    record(sink, "latala_ratio_lo", lo);
    record(sink, "latala_ratio_hi", hi);
    s.note = fmtstr("K = %.4g, ratio band [%.4g, %.4g]", K, lo, hi);
  });
}

// ---------------------------------------------------------------------------
// Lower bound <= ascent search <= certified upper bound.
// ---------------------------------------------------------------------------

CheckResult check_search_sandwich_impl() {
  return run_suite("search-sandwich", [](Suite& s) {
    for (const Rational& eps : {Rational(1, 2), Rational(1, 8), Rational(1, 64)})
      for (long d : {1L, 2L, 4L, 8L, 16L, 64L, 256L, 1024L})
        for (double p : p_grid()) {
          const AtomSpace space = build_atom_space(eps, d, default_q0(d), d > 16);
          const double lower = lower_bound_weak_norm(space, p);
          const double search = empirical_norm_search(space, p, 40, 17);
          const double upper = upper_bound_weak_norm(eps, d, p);
          s.reqf(lower <= search * (1.0 + 1e-12), "search %.12g below lower %.12g at d=%ld p=%.4g",
                 search, lower, d, p);
          s.reqf(search <= upper * (1.0 + 1e-9), "search %.12g above upper %.12g at d=%ld p=%.4g",
                 search, upper, d, p);
        }

    bool threw = false;
    try {
      const AtomSpace space = build_atom_space(Rational(1, 2), 2, default_q0(2));
      empirical_norm_search(space, 2.0, 0, 0, false);
    } catch (const BudgetZero&) {
      threw = true;
    }
    s.req(threw, "search accepted a zero budget without seeds");
  });
}

// ---------------------------------------------------------------------------
// Legendre pair: Young's inequality and the growth caps on phi.
// ---------------------------------------------------------------------------

CheckResult check_legendre_young_impl(ConstantSink* sink) {
  return run_suite("legendre-young", [sink](Suite& s) {
    std::mt19937_64 rng(0x5eed0011ULL);
    std::uniform_real_distribution<double> span(-3.0, 3.0);
    double phi_cap = 0.0;
    struct P {
      Rational eps;
      long d;
    };
    for (const P& pr : {P{Rational(1, 4), 8}, P{Rational(1, 64), 1000}, P{Rational(1, 2), 2},
                        P{Rational::pow2(-10), 1L << 20}}) {
      const EndpointReport ep = endpoint_machinery(pr.eps, pr.d);
      const double e_f = pr.eps.to_double(), c = ep.c;

      for (int t = 0; t < 200; ++t) {
        const double a = std::exp(span(rng)), b = std::exp(span(rng));
        const double lhs = a * b;
        const double rhs = legendre_phi(a, e_f, c) + legendre_psi(b, e_f, c);
        // Tolerance scales with the product: the bound is exact in real
        // arithmetic, so only rounding separates the sides.
        s.reqf(lhs <= rhs + 1e-12 * std::max(1.0, lhs), "Young violated: ab=%.12g rhs=%.12g", lhs,
               rhs);
      }
      // Equality pairs b = psi'(t*) at t* = log(x/eps)/c.
      for (double x : {2.0 * e_f, 1.0, 10.0}) {
        if (x <= e_f) continue;
        const double tstar = std::log(x / e_f) / c;
        const double lhs = x * tstar;
        const double rhs = legendre_phi(x, e_f, c) + legendre_psi(tstar, e_f, c);
        s.reqf(lhs <= rhs + 1e-12 * std::max(1.0, lhs), "Young tight pair violated at x=%.4g", x);
        s.reqf(rhs <= lhs + 1e-9 * std::max(1.0, lhs), "Legendre sup not attained at x=%.4g", x);
      }
      // phi(x) <= (x/c) log(x/eps), and phi(x) / ((x/c) log(e+x)) bounded for
      // x >= 10/eps.
      for (double mul : {1.0, 10.0, 100.0}) {
        const double x = 10.0 / e_f * mul;
        const double phi = legendre_phi(x, e_f, c);
        s.reqf(phi <= (x / c) * std::log(x / e_f), "phi above its log cap at x=%.6g", x);
        phi_cap = std::max(phi_cap, phi / ((x / c) * std::log(std::exp(1.0) + x)));
      }
      s.req(legendre_phi(e_f * 0.5, e_f, c) == 0.0, "phi nonzero below eps");
      s.req(legendre_phi(e_f, e_f, c) == 0.0, "phi nonzero at eps");
    }
    s.reqf(phi_cap <= 2.0, "phi growth constant %.6g out of range", phi_cap);
    record(sink, "legendre_phi_log_cap", phi_cap);
    s.note = fmtstr("phi/(x/c log(e+x)) <= %.4g on the tail", phi_cap);
  });
}

}  // namespace

CheckResult check_exact_identities() { return check_exact_identities_impl(); }
CheckResult check_oracle_equivalence() { return check_oracle_equivalence_impl(); }
CheckResult check_eta_equation(bool full_grid) { return check_eta_equation_impl(full_grid); }
CheckResult check_regime_conformance(bool full_grid, int threads, ConstantSink* constants) {
  return check_regime_conformance_impl(full_grid, resolve_threads(threads), constants);
}
CheckResult check_rq_cases() { return check_rq_cases_impl(); }
CheckResult check_endpoint(bool full_grid, int threads, ConstantSink* constants) {
  return check_endpoint_impl(full_grid, resolve_threads(threads), constants);
}
CheckResult check_families() { return check_families_impl(); }
CheckResult check_basis_table() { return check_basis_table_impl(); }
CheckResult check_maximal_invariants() { return check_maximal_invariants_impl(); }
CheckResult check_conditioning() { return check_conditioning_impl(); }
CheckResult check_latala_equivalence(bool full_grid, ConstantSink* constants) {
  return check_latala_equivalence_impl(full_grid, constants);
}
CheckResult check_search_sandwich() { return check_search_sandwich_impl(); }
CheckResult check_legendre_young(ConstantSink* constants) {
  return check_legendre_young_impl(constants);
}

int resolve_threads(int requested) {
  if (requested > 0) return std::min(requested, 256);
  if (const char* env = std::getenv("TORUSLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(std::min(v, 256L));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

VerifyReport run_verify(const VerifyOptions& opt) {
  VerifyReport rep;
  const int threads = resolve_threads(opt.threads);
  rep.checks.push_back(check_exact_identities());
  if (opt.with_oracle) rep.checks.push_back(check_oracle_equivalence());
  rep.checks.push_back(check_eta_equation(opt.full_grid));
  rep.checks.push_back(check_regime_conformance(opt.full_grid, threads, &rep.constants));
  rep.checks.push_back(check_rq_cases());
  rep.checks.push_back(check_endpoint(opt.full_grid, threads, &rep.constants));
  rep.checks.push_back(check_families());
  rep.checks.push_back(check_basis_table());
  rep.checks.push_back(check_maximal_invariants());
  if (opt.with_oracle) rep.checks.push_back(check_conditioning());
  rep.checks.push_back(check_latala_equivalence(opt.full_grid, &rep.constants));
  rep.checks.push_back(check_search_sandwich());
  rep.checks.push_back(check_legendre_young(&rep.constants));
  return rep;
}

}  // namespace toruslab
