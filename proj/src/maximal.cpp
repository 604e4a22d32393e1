#include "toruslab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "toruslab/binomial.hpp"

namespace toruslab {

namespace {

// avg_k numerators for enumerated storage, exact.
std::vector<Rational> averages_enumerated_exact(const StepFunction& f) {
  const AtomSpace& s = f.space();
  const long d = s.d();
  std::vector<Rational> acc(static_cast<std::size_t>(d), Rational(0));
  std::vector<Rational> class_meas(static_cast<std::size_t>(d) + 1);
  for (long j = 0; j <= d; ++j) class_meas[j] = s.inner_class_atom_measure(j);
  const std::uint64_t n = std::uint64_t{1} << d;
  for (std::uint64_t mask = 1; mask < n; ++mask) {
    const Rational fv = f.slot_exact(static_cast<std::size_t>(mask));
    if (fv.is_zero()) continue;
    const Rational fm = fv * class_meas[std::popcount(mask)];
    for (std::uint64_t bits = mask; bits;) {
      const int k = std::countr_zero(bits);
      acc[static_cast<std::size_t>(k)] += fm;
      bits &= bits - 1;
    }
  }
  const Rational slab_m = s.slab_measure();
  for (long k = 1; k <= d; ++k) {
    const Rational sv = f.value_exact(AtomId::outer_slab(static_cast<int>(k)));
    if (!sv.is_zero()) acc[k - 1] += sv * slab_m;
    acc[k - 1] /= s.q0_measure();
  }
  return acc;
}

std::vector<double> averages_enumerated_f64(const StepFunction& f) {
  const AtomSpace& s = f.space();
  const long d = s.d();
  std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
  std::vector<double> class_meas(static_cast<std::size_t>(d) + 1);
  for (long j = 0; j <= d; ++j) class_meas[j] = s.inner_class_atom_measure(j).to_double();
  const std::uint64_t n = std::uint64_t{1} << d;
  for (std::uint64_t mask = 1; mask < n; ++mask) {
    const double fv = f.slot_f64(static_cast<std::size_t>(mask));
    if (fv == 0.0) continue;
    const double fm = fv * class_meas[std::popcount(mask)];
    for (std::uint64_t bits = mask; bits;) {
      acc[static_cast<std::size_t>(std::countr_zero(bits))] += fm;
      bits &= bits - 1;
    }
  }
  const double slab_m = s.slab_measure().to_double();
  const double q0 = s.q0_measure().to_double();
  for (long k = 1; k <= d; ++k) {
    acc[k - 1] += f.value_f64(AtomId::outer_slab(static_cast<int>(k))) * slab_m;
    acc[k - 1] /= q0;
  }
  return acc;
}

// Common average for symmetric storage: all d averages coincide, with
// sum_{E ni k, |E|=j} mu(Inner(E)) = (j/d) * C(d,j) eps^j (1-eps)^(d-j) q0.
Rational average_symmetric_exact(const StepFunction& f) {
  const AtomSpace& s = f.space();
  const long d = s.d();
  Rational acc(0);
  for (long j = 1; j <= d; ++j) {
    const Rational fv = f.slot_exact(static_cast<std::size_t>(j));
    if (fv.is_zero()) continue;
    acc += fv * Rational(j, d) * s.slot_total_measure(static_cast<std::size_t>(j));
  }
  const Rational sv = f.slot_exact(static_cast<std::size_t>(d) + 1);
  if (!sv.is_zero()) acc += sv * s.slab_measure();
  return acc / s.q0_measure();
}

double average_symmetric_f64(const StepFunction& f) {
  const AtomSpace& s = f.space();
  const long d = s.d();
  double acc = 0.0;
  for (long j = 1; j <= d; ++j) {
    const double fv = f.slot_f64(static_cast<std::size_t>(j));
    if (fv == 0.0) continue;
    acc += fv * (static_cast<double>(j) / static_cast<double>(d)) *
           s.slot_total_measure_f64(static_cast<std::size_t>(j));
  }
  acc += f.slot_f64(static_cast<std::size_t>(d) + 1) * s.slab_measure().to_double();
  return acc / s.q0_measure().to_double();
}

}  // namespace

MaximalResult apply_maximal(const StepFunction& f) {
  const AtomSpace& s = f.space();
  const long d = s.d();
  const bool exact = f.mode() == NumericMode::exact;

  if (s.symmetric_mode()) {
    StepFunction mf = StepFunction::zeros(s, f.mode());
    MaximalResult out{std::move(mf), {}, {}};
    if (exact) {
      const Rational avg = average_symmetric_exact(f);
      for (long j = 1; j <= d; ++j) out.mf.set_inner_class(j, avg);
      out.mf.set_all_slabs(avg);
      out.averages_exact.assign(static_cast<std::size_t>(d), avg);
      out.averages.assign(static_cast<std::size_t>(d), avg.to_double());
    } else {
      const double avg = average_symmetric_f64(f);
      for (long j = 1; j <= d; ++j) out.mf.set_inner_class(j, avg);
      out.mf.set_all_slabs(avg);
      out.averages.assign(static_cast<std::size_t>(d), avg);
    }
    return out;
  }

  StepFunction mf = StepFunction::zeros(s, f.mode());
  MaximalResult out{std::move(mf), {}, {}};
  const std::uint64_t n = std::uint64_t{1} << d;
  if (exact) {
    out.averages_exact = averages_enumerated_exact(f);
    out.averages.reserve(static_cast<std::size_t>(d));
    for (const auto& a : out.averages_exact) out.averages.push_back(a.to_double());
    for (std::uint64_t mask = 1; mask < n; ++mask) {
      const Rational* best = nullptr;
      for (std::uint64_t bits = mask; bits;) {
        const Rational& a = out.averages_exact[static_cast<std::size_t>(std::countr_zero(bits))];
        if (!best || *best < a) best = &a;
        bits &= bits - 1;
      }
      out.mf.set_slot(static_cast<std::size_t>(mask), *best);
    }
    for (long k = 1; k <= d; ++k)
      out.mf.set(AtomId::outer_slab(static_cast<int>(k)), out.averages_exact[k - 1]);
  } else {
    out.averages = averages_enumerated_f64(f);
    for (std::uint64_t mask = 1; mask < n; ++mask) {
      double best = 0.0;
      for (std::uint64_t bits = mask; bits;) {
        best = std::max(best, out.averages[static_cast<std::size_t>(std::countr_zero(bits))]);
        bits &= bits - 1;
      }
      out.mf.set_slot(static_cast<std::size_t>(mask), best);
    }
    for (long k = 1; k <= d; ++k)
      out.mf.set(AtomId::outer_slab(static_cast<int>(k)), out.averages[k - 1]);
  }
  return out;
}

Rational superlevel_measure(const StepFunction& g, const Rational& lambda) {
  if (g.mode() != NumericMode::exact)
    throw Error("exact superlevel_measure needs an exact-mode function");
  const AtomSpace& s = g.space();
  Rational acc(0);
  for (std::size_t i = 0; i < s.slot_count(); ++i)
    if (g.slot_exact(i) > lambda) acc += s.slot_total_measure(i);
  return acc;
}

double superlevel_measure_f64(const StepFunction& g, double lambda) {
  const AtomSpace& s = g.space();
  if (g.mode() == NumericMode::exact)
    return superlevel_measure(g, Rational::from_double(lambda)).to_double();
  double acc = 0.0;
  for (std::size_t i = 0; i < s.slot_count(); ++i)
    if (g.slot_f64(i) > lambda) acc += s.slot_total_measure_f64(i);
  return acc;
}

WeakNormDetail weak_lp_norm_detail(const StepFunction& g, double p) {
  if (p <= 0.0) throw Error("weak L^p norm needs p > 0");
  const AtomSpace& s = g.space();
  WeakNormDetail best;
  if (g.mode() == NumericMode::exact) {
    std::vector<std::pair<Rational, Rational>> vm;  // (value, total measure)
    for (std::size_t i = 0; i < s.slot_count(); ++i) {
      const Rational v = g.slot_exact(i);
      if (v.sign() > 0) vm.emplace_back(v, s.slot_total_measure(i));
    }
    std::sort(vm.begin(), vm.end(),
              [](const auto& a, const auto& b) { return b.first < a.first; });
    Rational tail(0);
    for (std::size_t i = 0; i < vm.size(); ++i) {
      tail += vm[i].second;
      if (i + 1 < vm.size() && vm[i + 1].first == vm[i].first) continue;  // same level
      const double cand = vm[i].first.to_double() * std::pow(tail.to_double(), 1.0 / p);
      if (cand > best.norm) {
        best.norm = cand;
        best.level = vm[i].first.to_double();
        best.tail = tail.to_double();
      }
    }
    return best;
  }
  std::vector<std::pair<double, double>> vm;
  for (std::size_t i = 0; i < s.slot_count(); ++i) {
    const double v = g.slot_f64(i);
    if (v > 0.0) vm.emplace_back(v, s.slot_total_measure_f64(i));
  }
  std::sort(vm.begin(), vm.end(), [](const auto& a, const auto& b) { return b.first < a.first; });
  double tail = 0.0;
  for (std::size_t i = 0; i < vm.size(); ++i) {
    tail += vm[i].second;
    if (i + 1 < vm.size() && vm[i + 1].first == vm[i].first) continue;
    const double cand = vm[i].first * std::pow(tail, 1.0 / p);
    if (cand > best.norm) {
      best.norm = cand;
      best.level = vm[i].first;
      best.tail = tail;
    }
  }
  return best;
}

double weak_lp_norm(const StepFunction& g, double p) { return weak_lp_norm_detail(g, p).norm; }

double lp_norm(const StepFunction& f, double p) {
  if (p <= 0.0) throw Error("L^p norm needs p > 0");
  const AtomSpace& s = f.space();
  double acc = 0.0;
  for (std::size_t i = 0; i < s.slot_count(); ++i) {
    const double v = std::abs(f.slot_f64(i));
    if (v > 0.0) acc += std::pow(v, p) * s.slot_total_measure_f64(i);
  }
  return std::pow(acc, 1.0 / p);
}

double llogl_functional(const StepFunction& f, double lambda) {
  if (!(lambda > 0.0)) throw Error("llogl_functional needs lambda > 0");
  const AtomSpace& s = f.space();
  double acc = 0.0;
  for (std::size_t i = 0; i < s.slot_count(); ++i) {
    const double v = f.slot_f64(i);
    if (v <= 0.0) continue;
    const double t = v / lambda;
    acc += t * std::log(std::exp(1.0) + t) * s.slot_total_measure_f64(i);
  }
  return acc;
}

const char* extremal_kind_name(ExtremalKind kind) {
  switch (kind) {
    case ExtremalKind::center: return "center";
    case ExtremalKind::single: return "single";
    case ExtremalKind::height: return "height";
  }
  return "?";
}

namespace {

// integral of h^q in binary64 (slab part + inner binomial part by class).
double height_pow_integral_f64(const AtomSpace& s, double q) {
  const long d = s.d();
  double acc = static_cast<double>(d) * s.slab_measure().to_double();  // 1^q per slab
  if (s.symmetric_mode()) {
    for (long j = 1; j <= d; ++j)
      acc += std::pow(static_cast<double>(j), q) *
             s.slot_total_measure_f64(static_cast<std::size_t>(j));
  } else {
    std::vector<double> class_meas(static_cast<std::size_t>(d) + 1);
    for (long j = 0; j <= d; ++j) class_meas[j] = s.inner_class_atom_measure(j).to_double();
    const std::uint64_t n = std::uint64_t{1} << d;
    std::vector<double> pw(static_cast<std::size_t>(d) + 1, 0.0);
    for (long j = 1; j <= d; ++j) pw[j] = std::pow(static_cast<double>(j), q);
    for (std::uint64_t mask = 1; mask < n; ++mask) {
      const int j = std::popcount(mask);
      acc += pw[j] * class_meas[j];
    }
  }
  return acc;
}

}  // namespace

StepFunction extremal_function(const AtomSpace& space, ExtremalKind kind, double p) {
  switch (kind) {
    case ExtremalKind::center:
      return indicator_q0(space);
    case ExtremalKind::single: {
      if (space.symmetric_mode())
        throw Error("single extremal is not permutation-symmetric; needs enumerated storage");
      StepFunction f = StepFunction::zeros(space, NumericMode::exact);
      const std::uint64_t n = std::uint64_t{1} << space.d();
      for (std::uint64_t mask = 1; mask < n; mask += 2)  // bit 0 set: E contains 1
        f.set_slot(static_cast<std::size_t>(mask), Rational(1));
      f.set(AtomId::outer_slab(1), Rational(1));
      return f;
    }
    case ExtremalKind::height: {
      if (!(p > 1.0) || !std::isfinite(p)) throw Error("height extremal needs p in (1, inf)");
      const double q = p / (p - 1.0);
      const double scale = std::pow(height_pow_integral_f64(space, q), 1.0 / p);
      StepFunction f = StepFunction::zeros(space, NumericMode::binary64);
      for (long j = 1; j <= space.d(); ++j)
        f.set_inner_class(j, std::pow(static_cast<double>(j), q - 1.0) / scale);
      f.set_all_slabs(1.0 / scale);
      return f;
    }
  }
  throw Error("bad extremal kind");
}

double witness_ratio(const AtomSpace& space, ExtremalKind kind, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error("witness ratio needs p in (1, inf)");
  if (space.symmetric_mode()) {
    // Closed forms (exact for these witnesses; the q0 factors cancel), so
    // huge-d symmetric spaces never materialize slot vectors here.  The
    // enumerated path below recomputes the same ratios from the functions
    // themselves, which is what ties these formulas down in the tests.
    const double eps = space.eps().to_double();
    const double d = static_cast<double>(space.d());
    const double sigma = d * (1.0 - eps) + 1.0 - std::exp(d * std::log1p(-eps));
    switch (kind) {
      case ExtremalKind::center:
        // M(1_{Q0}) = eps on sh.
        return eps * std::pow(sigma, 1.0 / p);
      case ExtremalKind::single: {
        // M(1_{Q1}) = 1 on Q1 and eps^2 on sh \ Q1; the sup sits at one of
        // the two attained values.
        return std::max(1.0, eps * eps * std::pow(sigma, 1.0 / p));
      }
      case ExtremalKind::height: {
        // f = h^(q-1): all averages equal tau q0 / (d q0), Mf = that on sh,
        // and the ratio collapses to tau^(1/q) sigma^(1/p) / d.
        const double q = p / (p - 1.0);
        const double tau = (1.0 - eps) * d + binom_q_moment(eps, space.d(), q);
        return std::pow(tau, 1.0 / q) * std::pow(sigma, 1.0 / p) / d;
      }
    }
    throw Error("bad extremal kind");
  }
  const StepFunction f = extremal_function(space, kind, p).to_f64();
  const MaximalResult mr = apply_maximal(f);
  return weak_lp_norm(mr.mf, p) / lp_norm(f, p);
}

double lower_bound_weak_norm(const AtomSpace& space, double p) {
  double best = 0.0;
  for (ExtremalKind kind : {ExtremalKind::center, ExtremalKind::single, ExtremalKind::height})
    best = std::max(best, witness_ratio(space, kind, p));
  return best;
}

// ---------------------------------------------------------------------------
// empirical_norm_search
//
// For permutation-symmetric f all d averages coincide at some value a, so
// Mf = a * 1_sh and the weak-type ratio is a |sh|^(1/p) / ||f||_p.  With
// x_j the value on inner class j and t the slab value,
//   a       = sum_j x_j w_j + t (1-eps),        w_j = (j/d) C(d,j) eps^j (1-eps)^(d-j)
//   ||f||^p = sum_j x_j^p c_j + t^p d (1-eps) q0
// The one-dimensional maximizer of (alpha + beta t) / (gamma + delta t^p)^(1/p)
// is t* = (beta gamma / (alpha delta))^(1/(p-1)), which drives the ascent.
// ---------------------------------------------------------------------------

namespace {

struct SymObjective {
  double p = 2.0;
  double shadow = 0.0;       // |sh|
  double slab_total = 0.0;   // d (1-eps) q0
  double slab_beta = 0.0;    // (1-eps)
  std::vector<double> w;     // a-weights, classes 1..d at [1..d]
  std::vector<double> c;     // ||.||^p weights (class totals)

  double ratio(const std::vector<double>& x, double t) const {
    double a = slab_beta * t;
    double np = slab_total * std::pow(t, p);
    for (std::size_t j = 1; j < w.size(); ++j) {
      if (x[j] > 0.0) {
        a += w[j] * x[j];
        np += c[j] * std::pow(x[j], p);
      }
    }
    if (np <= 0.0) return 0.0;
    return a * std::pow(shadow, 1.0 / p) / std::pow(np, 1.0 / p);
  }
};

SymObjective make_objective(const AtomSpace& s, double p) {
  SymObjective o;
  o.p = p;
  {
    // f64 shadow: the exact route would carry a 2^20-bit (1-eps)^d.
    const double eps = s.eps().to_double();
    const double d = static_cast<double>(s.d());
    o.shadow = s.q0_measure().to_double() *
               (d * (1.0 - eps) + 1.0 - std::exp(d * std::log1p(-eps)));
  }
  o.slab_total = static_cast<double>(s.d()) * s.slab_measure().to_double();
  o.slab_beta = 1.0 - s.eps().to_double();
  const long d = s.d();
  o.w.assign(static_cast<std::size_t>(d) + 1, 0.0);
  o.c.assign(static_cast<std::size_t>(d) + 1, 0.0);
  const double q0 = s.q0_measure().to_double();
  for (long j = 1; j <= d; ++j) {
    double ctot;
    if (s.symmetric_mode()) {
      ctot = s.slot_total_measure_f64(static_cast<std::size_t>(j));
    } else {
      ctot = Rational::binom(static_cast<unsigned long>(d), static_cast<unsigned long>(j))
                 .to_double() *
             s.inner_class_atom_measure(j).to_double();
    }
    o.c[j] = ctot;
    o.w[j] = (static_cast<double>(j) / static_cast<double>(d)) * ctot / q0;
  }
  return o;
}

double ascend(const SymObjective& o, std::vector<double> x, double t, long budget) {
  const double p = o.p;
  double best = o.ratio(x, t);
  for (long sweep = 0; sweep < budget; ++sweep) {
    // slab coordinate, then the classes
    {
      double a_rest = 0.0, np_rest = 0.0;
      for (std::size_t j = 1; j < o.w.size(); ++j) {
        a_rest += o.w[j] * x[j];
        np_rest += o.c[j] * std::pow(x[j], p);
      }
      if (a_rest > 0.0 && o.slab_total > 0.0)
        t = std::pow(o.slab_beta * np_rest / (a_rest * o.slab_total), 1.0 / (p - 1.0));
    }
    for (std::size_t j = 1; j < o.w.size(); ++j) {
      double a_rest = o.slab_beta * t, np_rest = o.slab_total * std::pow(t, p);
      for (std::size_t i = 1; i < o.w.size(); ++i) {
        if (i == j) continue;
        a_rest += o.w[i] * x[i];
        np_rest += o.c[i] * std::pow(x[i], p);
      }
      if (a_rest > 0.0 && o.c[j] > 0.0)
        x[j] = std::pow(o.w[j] * np_rest / (a_rest * o.c[j]), 1.0 / (p - 1.0));
    }
    // rescale (the ratio is 0-homogeneous) to keep powers representable
    double mx = t;
    for (std::size_t j = 1; j < o.w.size(); ++j) mx = std::max(mx, x[j]);
    if (mx > 0.0) {
      t /= mx;
      for (std::size_t j = 1; j < o.w.size(); ++j) x[j] /= mx;
    }
    const double cur = o.ratio(x, t);
    if (cur <= best * (1.0 + 1e-14)) {
      best = std::max(best, cur);
      break;
    }
    best = cur;
  }
  return best;
}

}  // namespace

double empirical_norm_search(const AtomSpace& space, double p, long budget, std::uint64_t seed,
                             bool witness_starts) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error("empirical_norm_search needs p in (1, inf)");
  if (budget < 0) throw Error("budget must be >= 0");
  if (budget == 0 && !witness_starts)
    throw BudgetZero("budget 0 with witness starts disabled leaves nothing to evaluate");

  double best = 0.0;
  if (witness_starts)
    for (ExtremalKind kind : {ExtremalKind::center, ExtremalKind::single, ExtremalKind::height})
      best = std::max(best, witness_ratio(space, kind, p));
  if (budget == 0) return best;

  const SymObjective o = make_objective(space, p);
  const long d = space.d();
  const double q = p / (p - 1.0);

  std::vector<std::pair<std::vector<double>, double>> starts;
  {
    std::vector<double> x(static_cast<std::size_t>(d) + 1, 0.0);
    for (long j = 1; j <= d; ++j) x[j] = std::pow(static_cast<double>(j), q - 1.0);
    starts.emplace_back(std::move(x), 1.0);  // height shape
  }
  starts.emplace_back(std::vector<double>(static_cast<std::size_t>(d) + 1, 1.0), 1.0);  // flat
  {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int r = 0; r < 2; ++r) {
      std::vector<double> x(static_cast<std::size_t>(d) + 1, 0.0);
      for (long j = 1; j <= d; ++j) x[j] = std::exp(u(rng));
      starts.emplace_back(std::move(x), std::exp(u(rng)));
    }
  }
  for (auto& [x, t] : starts) best = std::max(best, ascend(o, std::move(x), t, budget));
  return best;
}

}  // namespace toruslab
