#include "toruslab/atom_space.hpp"

#include <cmath>

namespace toruslab {

namespace {

constexpr long kEnumeratedMaxD = 24;

double log_binom(long n, long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

AtomSpace build_atom_space(const Rational& eps, long d, const Rational& q0,
                           std::optional<bool> symmetric) {
  if (eps.sign() <= 0 || eps > Rational(1, 2))
    throw BadEpsilon("eps must lie in (0, 1/2], got " + eps.str());
  if (d < 1) throw Error("d must be >= 1, got " + std::to_string(d));
  if (q0.sign() <= 0 || q0 >= Rational(1))
    throw Error("q0_measure must lie in (0, 1), got " + q0.str());

  const Rational one_minus_eps = Rational(1) - eps;
  // q0 (1 + d(1-eps)) <= 1, else the four pieces cannot fit in total mass 1.
  const Rational occupied = q0 * (Rational(1) + Rational(d) * one_minus_eps);
  if (occupied > Rational(1))
    throw InfeasibleMeasure("q0 (1 + d(1-eps)) = " + occupied.str() + " exceeds 1");

  bool sym = symmetric.value_or(d > kEnumeratedMaxD);
  if (!sym && d > kEnumeratedMaxD)
    throw Error("enumerated storage is limited to d <= 24; use symmetric mode");

  auto data = std::make_shared<AtomSpace::Data>();
  data->eps = eps;
  data->d = d;
  data->q0 = q0;
  data->symmetric = sym;
  data->one_minus_eps = one_minus_eps;
  AtomSpace s;
  s.data_ = std::move(data);
  return s;
}

std::size_t AtomSpace::slot_count() const {
  const long d = data_->d;
  if (data_->symmetric) return static_cast<std::size_t>(d) + 3;  // classes 0..d, slab, remainder
  return (std::size_t{1} << d) + static_cast<std::size_t>(d) + 1;
}

SlotInfo AtomSpace::slot(std::size_t i) const {
  const long d = data_->d;
  SlotInfo info;
  if (data_->symmetric) {
    if (i <= static_cast<std::size_t>(d)) {
      info.kind = AtomId::Kind::inner;
      info.inner_size = static_cast<long>(i);
      // class multiplicity C(d, j); may exceed 64 bits for huge d, so it is
      // not stored here -- exact totals use Rational::binom directly.
      info.multiplicity = 0;
      return info;
    }
    if (i == static_cast<std::size_t>(d) + 1) {
      info.kind = AtomId::Kind::outer_slab;
      info.slab_k = 0;  // all d slabs share the slot
      info.multiplicity = static_cast<std::uint64_t>(d);
      return info;
    }
    if (i == static_cast<std::size_t>(d) + 2) {
      info.kind = AtomId::Kind::remainder;
      return info;
    }
  } else {
    const std::size_t inner_count = std::size_t{1} << d;
    if (i < inner_count) {
      info.kind = AtomId::Kind::inner;
      info.mask = i;
      info.inner_size = std::popcount(static_cast<std::uint64_t>(i));
      return info;
    }
    if (i < inner_count + static_cast<std::size_t>(d)) {
      info.kind = AtomId::Kind::outer_slab;
      info.slab_k = static_cast<int>(i - inner_count) + 1;
      return info;
    }
    if (i == inner_count + static_cast<std::size_t>(d)) {
      info.kind = AtomId::Kind::remainder;
      return info;
    }
  }
  throw Error("slot index out of range");
}

std::size_t AtomSpace::slot_of(const AtomId& id) const {
  const long d = data_->d;
  switch (id.kind) {
    case AtomId::Kind::inner: {
      if (d < 64 && id.index >> d)
        throw Error("inner atom mask has bits above d");
      if (data_->symmetric) return static_cast<std::size_t>(std::popcount(id.index));
      return static_cast<std::size_t>(id.index);
    }
    case AtomId::Kind::outer_slab: {
      if (id.index < 1 || id.index > static_cast<std::uint64_t>(d))
        throw Error("slab index must lie in 1..d");
      if (data_->symmetric) return static_cast<std::size_t>(d) + 1;
      return (std::size_t{1} << d) + static_cast<std::size_t>(id.index) - 1;
    }
    case AtomId::Kind::remainder:
      return data_->symmetric ? static_cast<std::size_t>(d) + 2
                              : (std::size_t{1} << d) + static_cast<std::size_t>(d);
  }
  throw Error("bad AtomId kind");
}

Rational AtomSpace::inner_class_atom_measure(long j) const {
  if (j < 0 || j > data_->d) throw Error("inner class out of range");
  return data_->eps.pow(static_cast<unsigned long>(j)) *
         data_->one_minus_eps.pow(static_cast<unsigned long>(data_->d - j)) * data_->q0;
}

Rational AtomSpace::slab_measure() const { return data_->one_minus_eps * data_->q0; }

Rational AtomSpace::remainder_measure() const {
  return Rational(1) - data_->q0 * (Rational(1) + Rational(data_->d) * data_->one_minus_eps);
}

Rational AtomSpace::slot_atom_measure(std::size_t i) const {
  const SlotInfo info = slot(i);
  switch (info.kind) {
    case AtomId::Kind::inner:
      return inner_class_atom_measure(info.inner_size);
    case AtomId::Kind::outer_slab:
      return slab_measure();
    case AtomId::Kind::remainder:
      return remainder_measure();
  }
  throw Error("bad slot kind");
}

Rational AtomSpace::slot_total_measure(std::size_t i) const {
  const SlotInfo info = slot(i);
  if (info.kind == AtomId::Kind::inner && data_->symmetric)
    return Rational::binom(static_cast<unsigned long>(data_->d),
                           static_cast<unsigned long>(info.inner_size)) *
           inner_class_atom_measure(info.inner_size);
  if (info.kind == AtomId::Kind::outer_slab && data_->symmetric)
    return Rational(data_->d) * slab_measure();
  return slot_atom_measure(i);
}

double AtomSpace::slot_total_measure_f64(std::size_t i) const {
  const SlotInfo info = slot(i);
  const double d = static_cast<double>(data_->d);
  const double eps = data_->eps.to_double();
  const double q0 = data_->q0.to_double();
  switch (info.kind) {
    case AtomId::Kind::inner: {
      const double j = static_cast<double>(info.inner_size);
      // log-domain binomial weight: exact rationals would carry ~d-bit
      // denominators for huge d.
      double lg = j * std::log(eps) + (d - j) * std::log1p(-eps);
      if (data_->symmetric) lg += log_binom(data_->d, info.inner_size);
      return std::exp(lg) * q0;
    }
    case AtomId::Kind::outer_slab: {
      const double one = (1.0 - eps) * q0;
      return data_->symmetric ? d * one : one;
    }
    case AtomId::Kind::remainder:
      return remainder_measure().to_double();
  }
  throw Error("bad slot kind");
}

Rational shadow_measure(const AtomSpace& space) {
  const Rational one_minus_eps = Rational(1) - space.eps();
  const Rational d(space.d());
  return space.q0_measure() *
         (d * one_minus_eps + Rational(1) - one_minus_eps.pow(static_cast<unsigned long>(space.d())));
}

// ---------------------------------------------------------------------------
// StepFunction
// ---------------------------------------------------------------------------

StepFunction::StepFunction(AtomSpace space, NumericMode mode) : space_(std::move(space)) {
  if (mode == NumericMode::exact)
    vals_ = std::vector<Rational>(space_.slot_count());
  else
    vals_ = std::vector<double>(space_.slot_count(), 0.0);
}

StepFunction StepFunction::zeros(const AtomSpace& space, NumericMode mode) {
  return StepFunction(space, mode);
}

void StepFunction::set_slot(std::size_t i, const Rational& v) {
  if (auto* ex = std::get_if<std::vector<Rational>>(&vals_)) {
    ex->at(i) = v;
    return;
  }
  std::get<std::vector<double>>(vals_).at(i) = v.to_double();
}

void StepFunction::set_slot(std::size_t i, double v) {
  if (auto* fp = std::get_if<std::vector<double>>(&vals_)) {
    fp->at(i) = v;
    return;
  }
  throw Error("cannot set a binary64 value on an exact-mode step function");
}

Rational StepFunction::slot_exact(std::size_t i) const {
  if (const auto* ex = std::get_if<std::vector<Rational>>(&vals_)) return ex->at(i);
  throw Error("step function is not in exact mode");
}

double StepFunction::slot_f64(std::size_t i) const {
  if (const auto* fp = std::get_if<std::vector<double>>(&vals_)) return fp->at(i);
  return std::get<std::vector<Rational>>(vals_).at(i).to_double();
}

void StepFunction::set(const AtomId& id, const Rational& v) {
  if (space_.symmetric_mode() && id.kind == AtomId::Kind::inner)
    throw Error("cannot set a single inner atom in symmetric mode; use set_inner_class");
  set_slot(space_.slot_of(id), v);
}

void StepFunction::set(const AtomId& id, double v) {
  if (space_.symmetric_mode() && id.kind == AtomId::Kind::inner)
    throw Error("cannot set a single inner atom in symmetric mode; use set_inner_class");
  set_slot(space_.slot_of(id), v);
}

namespace {

// Applies fn(slot) to every slot holding inner atoms with |E| = j.
template <typename Fn>
void for_inner_class(const AtomSpace& space, long j, Fn&& fn) {
  if (j < 0 || j > space.d()) throw Error("inner class out of range");
  if (space.symmetric_mode()) {
    fn(static_cast<std::size_t>(j));
    return;
  }
  const std::uint64_t n = std::uint64_t{1} << space.d();
  for (std::uint64_t mask = 0; mask < n; ++mask)
    if (std::popcount(mask) == j) fn(static_cast<std::size_t>(mask));
}

}  // namespace

void StepFunction::set_inner_class(long j, const Rational& v) {
  for_inner_class(space_, j, [&](std::size_t i) { set_slot(i, v); });
}

void StepFunction::set_inner_class(long j, double v) {
  for_inner_class(space_, j, [&](std::size_t i) { set_slot(i, v); });
}

void StepFunction::set_all_slabs(const Rational& v) {
  for (long k = 1; k <= space_.d(); ++k) {
    set_slot(space_.slot_of(AtomId::outer_slab(static_cast<int>(k))), v);
    if (space_.symmetric_mode()) break;  // one shared slot
  }
}

void StepFunction::set_all_slabs(double v) {
  for (long k = 1; k <= space_.d(); ++k) {
    set_slot(space_.slot_of(AtomId::outer_slab(static_cast<int>(k))), v);
    if (space_.symmetric_mode()) break;
  }
}

void StepFunction::set_remainder(const Rational& v) { set_slot(space_.slot_of(AtomId::remainder()), v); }
void StepFunction::set_remainder(double v) { set_slot(space_.slot_of(AtomId::remainder()), v); }

StepFunction StepFunction::to_f64() const {
  if (mode() == NumericMode::binary64) return *this;
  StepFunction out(space_, NumericMode::binary64);
  const auto& ex = std::get<std::vector<Rational>>(vals_);
  auto& fp = std::get<std::vector<double>>(out.vals_);
  for (std::size_t i = 0; i < ex.size(); ++i) fp[i] = ex[i].to_double();
  return out;
}

bool StepFunction::nonnegative() const {
  if (const auto* ex = std::get_if<std::vector<Rational>>(&vals_)) {
    for (const auto& v : *ex)
      if (v.is_negative()) return false;
    return true;
  }
  for (double v : std::get<std::vector<double>>(vals_))
    if (v < 0.0) return false;
  return true;
}

StepFunction operator+(const StepFunction& a, const StepFunction& b) {
  if (!same_space(a.space_, b.space_)) throw SpaceMismatch("adding step functions on different spaces");
  if (a.mode() != b.mode()) throw Error("adding step functions with different numeric modes");
  StepFunction out = a;
  if (out.mode() == NumericMode::exact) {
    auto& va = std::get<std::vector<Rational>>(out.vals_);
    const auto& vb = std::get<std::vector<Rational>>(b.vals_);
    for (std::size_t i = 0; i < va.size(); ++i) va[i] += vb[i];
  } else {
    auto& va = std::get<std::vector<double>>(out.vals_);
    const auto& vb = std::get<std::vector<double>>(b.vals_);
    for (std::size_t i = 0; i < va.size(); ++i) va[i] += vb[i];
  }
  return out;
}

StepFunction operator*(const Rational& c, const StepFunction& f) {
  StepFunction out = f;
  if (out.mode() == NumericMode::exact) {
    for (auto& v : std::get<std::vector<Rational>>(out.vals_)) v *= c;
  } else {
    const double cf = c.to_double();
    for (auto& v : std::get<std::vector<double>>(out.vals_)) v *= cf;
  }
  return out;
}

StepFunction operator*(double c, const StepFunction& f) {
  StepFunction out = f.mode() == NumericMode::exact ? f.to_f64() : f;
  for (auto& v : std::get<std::vector<double>>(out.vals_)) v *= c;
  return out;
}

StepFunction height_function(const AtomSpace& space) {
  StepFunction h = StepFunction::zeros(space, NumericMode::exact);
  for (long j = 0; j <= space.d(); ++j) h.set_inner_class(j, Rational(j));
  h.set_all_slabs(Rational(1));
  return h;
}

StepFunction indicator_q0(const AtomSpace& space) {
  StepFunction f = StepFunction::zeros(space, NumericMode::exact);
  for (long j = 0; j <= space.d(); ++j) f.set_inner_class(j, Rational(1));
  return f;
}

Rational integrate(const StepFunction& f, const StepFunction& g) {
  if (!same_space(f.space(), g.space())) throw SpaceMismatch("integrate over different spaces");
  if (f.mode() != NumericMode::exact || g.mode() != NumericMode::exact)
    throw Error("integrate is exact-mode only; use integrate_f64");
  const AtomSpace& s = f.space();
  Rational acc(0);
  for (std::size_t i = 0; i < s.slot_count(); ++i) {
    const Rational fv = f.slot_exact(i);
    if (fv.is_zero()) continue;
    const Rational gv = g.slot_exact(i);
    if (gv.is_zero()) continue;
    acc += fv * gv * s.slot_total_measure(i);
  }
  return acc;
}

Rational integrate(const StepFunction& f) {
  if (f.mode() != NumericMode::exact) throw Error("integrate is exact-mode only; use integrate_f64");
  const AtomSpace& s = f.space();
  Rational acc(0);
  for (std::size_t i = 0; i < s.slot_count(); ++i) {
    const Rational fv = f.slot_exact(i);
    if (fv.is_zero()) continue;
    acc += fv * s.slot_total_measure(i);
  }
  return acc;
}

double integrate_f64(const StepFunction& f) {
  const AtomSpace& s = f.space();
  double acc = 0.0;
  for (std::size_t i = 0; i < s.slot_count(); ++i) {
    const double fv = f.slot_f64(i);
    if (fv == 0.0) continue;
    acc += fv * s.slot_total_measure_f64(i);
  }
  return acc;
}

}  // namespace toruslab
