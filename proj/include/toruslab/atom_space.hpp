#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "toruslab/errors.hpp"
#include "toruslab/rational.hpp"

namespace toruslab {

// ---------------------------------------------------------------------------
// Atom space of an (eps, d)-configuration.
//
// A base rectangle Q0 of measure q0 together with its d shifted copies
// Q1..Qd generates a finite sigma-algebra whose atoms are:
//
//   Inner(E), E subseteq {1..d} : the part of Q0 covered by exactly the Qk
//                                 with k in E.  measure = eps^|E| (1-eps)^(d-|E|) q0
//   OuterSlab(k), k = 1..d      : Qk \ Q0.       measure = (1-eps) q0
//   Remainder                   : everything else. measure = 1 - q0 (1 + d(1-eps))
//
// The slabs are pairwise disjoint and disjoint from Q0; inside Q0 the d
// covering events are independent with probability eps each.  Total mass is
// exactly 1; feasibility requires q0 (1 + d(1-eps)) <= 1.
//
// Storage modes:
//   enumerated (d <= 24): one slot per atom, 2^d + d + 1 slots.
//   symmetric (forced for d > 24): inner atoms grouped by |E| into d+1
//     classes, one slot per class plus one shared slab slot and the
//     remainder; only permutation-symmetric functions are representable.
// ---------------------------------------------------------------------------

struct AtomId {
  enum class Kind : std::uint8_t { inner, outer_slab, remainder };
  Kind kind = Kind::remainder;
  // inner: bitmask of E (bit k-1 set iff k in E); outer_slab: k in 1..d.
  std::uint64_t index = 0;

  static AtomId inner(std::uint64_t mask) { return {Kind::inner, mask}; }
  static AtomId outer_slab(int k) { return {Kind::outer_slab, static_cast<std::uint64_t>(k)}; }
  static AtomId remainder() { return {Kind::remainder, 0}; }
};

// Metadata for one storage slot (an atom in enumerated mode, a class of
// atoms in symmetric mode).
struct SlotInfo {
  AtomId::Kind kind = AtomId::Kind::remainder;
  std::uint64_t mask = 0;       // enumerated inner slots only
  long inner_size = -1;         // |E| for inner slots/classes
  int slab_k = -1;              // enumerated slabs: 1..d; symmetric slab class: 0
  std::uint64_t multiplicity = 1;  // atoms represented by this slot
};

class AtomSpace {
 public:
  const Rational& eps() const { return data_->eps; }
  long d() const { return data_->d; }
  const Rational& q0_measure() const { return data_->q0; }
  bool symmetric_mode() const { return data_->symmetric; }

  std::size_t slot_count() const;
  SlotInfo slot(std::size_t i) const;
  std::size_t slot_of(const AtomId& id) const;

  // Per-atom measure of the atoms in slot i (every atom in a class has the
  // same measure).  Exact, computed on demand.
  Rational slot_atom_measure(std::size_t i) const;
  // Total measure of slot i = per-atom measure * multiplicity.
  Rational slot_total_measure(std::size_t i) const;
  double slot_total_measure_f64(std::size_t i) const;  // log-domain, safe for huge d

  Rational atom_measure(const AtomId& id) const { return slot_atom_measure(slot_of(id)); }

  // Closed-form building blocks.
  Rational inner_class_atom_measure(long j) const;  // eps^j (1-eps)^(d-j) q0
  Rational slab_measure() const;                    // (1-eps) q0
  Rational remainder_measure() const;               // 1 - q0 (1 + d(1-eps))

  friend bool same_space(const AtomSpace& a, const AtomSpace& b) {
    return a.data_ == b.data_ ||
           (a.data_->d == b.data_->d && a.data_->symmetric == b.data_->symmetric &&
            a.data_->eps == b.data_->eps && a.data_->q0 == b.data_->q0);
  }

 private:
  struct Data {
    Rational eps;
    long d = 0;
    Rational q0;
    bool symmetric = false;
    Rational one_minus_eps;
  };
  std::shared_ptr<const Data> data_;

  friend AtomSpace build_atom_space(const Rational&, long, const Rational&, std::optional<bool>);
};

// Validates eps in (0, 1/2], d >= 1, q0 in (0, 1), and the feasibility bound
// q0 (1 + d(1-eps)) <= 1.  symmetric defaults to off and is forced on for
// d > 24 (requesting enumerated storage there is an error).
AtomSpace build_atom_space(const Rational& eps, long d, const Rational& q0,
                           std::optional<bool> symmetric = std::nullopt);

// |sh| = |union of Q1..Qd| = q0 (d(1-eps) + 1 - (1-eps)^d).
Rational shadow_measure(const AtomSpace& space);

// ---------------------------------------------------------------------------
// Step functions: one numeric value per slot.  Exact (Rational) or binary64.
// ---------------------------------------------------------------------------

enum class NumericMode : std::uint8_t { exact, binary64 };

class StepFunction {
 public:
  static StepFunction zeros(const AtomSpace& space, NumericMode mode);

  const AtomSpace& space() const { return space_; }
  NumericMode mode() const {
    return std::holds_alternative<std::vector<Rational>>(vals_) ? NumericMode::exact
                                                                : NumericMode::binary64;
  }

  // Slot accessors (the storage-level API; works in both modes).
  void set_slot(std::size_t i, const Rational& v);
  void set_slot(std::size_t i, double v);
  Rational slot_exact(std::size_t i) const;  // exact mode only
  double slot_f64(std::size_t i) const;

  // Atom-level accessors.  Setting an inner atom in symmetric mode is
  // rejected (it would silently break the symmetry); use set_inner_class.
  void set(const AtomId& id, const Rational& v);
  void set(const AtomId& id, double v);
  double value_f64(const AtomId& id) const { return slot_f64(space_.slot_of(id)); }
  Rational value_exact(const AtomId& id) const { return slot_exact(space_.slot_of(id)); }

  // Sets every inner atom with |E| = j (both modes).
  void set_inner_class(long j, const Rational& v);
  void set_inner_class(long j, double v);
  void set_all_slabs(const Rational& v);
  void set_all_slabs(double v);
  void set_remainder(const Rational& v);
  void set_remainder(double v);

  StepFunction to_f64() const;  // exact -> binary64 copy (identity on binary64)

  bool nonnegative() const;

  friend StepFunction operator+(const StepFunction& a, const StepFunction& b);
  friend StepFunction operator*(const Rational& c, const StepFunction& f);
  friend StepFunction operator*(double c, const StepFunction& f);

 private:
  StepFunction(AtomSpace space, NumericMode mode);
  AtomSpace space_;
  std::variant<std::vector<Rational>, std::vector<double>> vals_;
};

// Height function h = sum_k 1_{Qk}: |E| on Inner(E), 1 on every slab, 0 on
// the remainder.  Exact mode.
StepFunction height_function(const AtomSpace& space);

// Indicator of Q0 (1 on every inner atom).  Exact mode.
StepFunction indicator_q0(const AtomSpace& space);

// Exact integral over the whole space; both functions must be exact mode and
// on the same space.  integrate(f) integrates f alone.
Rational integrate(const StepFunction& f);
Rational integrate(const StepFunction& f, const StepFunction& g);

// Binary64 integral, any mode.
double integrate_f64(const StepFunction& f);

}  // namespace toruslab
