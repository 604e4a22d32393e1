#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "toruslab/atom_space.hpp"

#include <cstdint>

using namespace toruslab;

namespace {
AtomSpace half_two() { return build_atom_space(Rational(1, 2), 2, Rational(1, 6), std::nullopt); }
}  // namespace

TEST_CASE("validation rejects bad parameters") {
  CHECK_THROWS_AS(build_atom_space(Rational(0), 2, Rational(1, 8), std::nullopt), BadEpsilon);
  CHECK_THROWS_AS(build_atom_space(Rational(3, 5), 2, Rational(1, 8), std::nullopt), BadEpsilon);
  CHECK_THROWS_AS(build_atom_space(Rational(-1, 2), 2, Rational(1, 8), std::nullopt), BadEpsilon);
  CHECK_THROWS_AS(build_atom_space(Rational(1, 2), 0, Rational(1, 8), std::nullopt), Error);
  // q0 (1 + d(1-eps)) > 1
  CHECK_THROWS_AS(build_atom_space(Rational(1, 2), 2, Rational(2, 3), std::nullopt), InfeasibleMeasure);
  CHECK_THROWS_AS(build_atom_space(Rational(1, 2), 2, Rational(0), std::nullopt), Error);
  // enumerated storage is capped at d = 24
  CHECK_THROWS_AS(build_atom_space(Rational(1, 2), 25, Rational(1, 64), false), Error);
  CHECK_NOTHROW(build_atom_space(Rational(1, 2), 25, Rational(1, 64), true));
  // feasibility boundary is allowed
  CHECK_NOTHROW(build_atom_space(Rational(1, 2), 2, Rational(1, 2), std::nullopt));
}

TEST_CASE("measures partition the total space") {
  auto sp = half_two();
  CHECK(sp.d() == 2);
  CHECK(sp.eps() == Rational(1, 2));
  CHECK(sp.q0_measure() == Rational(1, 6));
  CHECK_FALSE(sp.symmetric_mode());
  CHECK(sp.slot_count() == 4u + 2u + 1u);

  Rational total(0);
  for (std::size_t i = 0; i < sp.slot_count(); ++i) total += sp.slot_total_measure(i);
  CHECK(total == Rational(1));

  // every inner atom has mass eps^|E| (1-eps)^(d-|E|) q0 = 1/24 here
  for (std::uint64_t m = 0; m < 4; ++m)
    CHECK(sp.atom_measure(AtomId::inner(m)) == Rational(1, 24));
  CHECK(sp.atom_measure(AtomId::outer_slab(1)) == Rational(1, 12));
  CHECK(sp.atom_measure(AtomId::remainder()) == Rational(2, 3));
  CHECK(sp.remainder_measure() == Rational(2, 3));
}

TEST_CASE("shadow closed form and box masses") {
  auto sp = half_two();
  // |sh| = q0 (d(1-eps) + 1 - (1-eps)^d)
  CHECK(shadow_measure(sp) == Rational(7, 24));

  // |Q_k| = q0: inner atoms containing k plus the slab
  Rational qk = sp.atom_measure(AtomId::inner(0b01)) + sp.atom_measure(AtomId::inner(0b11)) +
                sp.atom_measure(AtomId::outer_slab(1));
  CHECK(qk == sp.q0_measure());

  auto sp3 = build_atom_space(Rational(1, 3), 3, Rational(1, 8), std::nullopt);
  CHECK(shadow_measure(sp3) == Rational(73, 216));
  // |sh| >= (d/2) q0
  CHECK(shadow_measure(sp3) >= Rational(3, 2) * sp3.q0_measure());
}

TEST_CASE("symmetric storage groups atoms by class") {
  auto sp = build_atom_space(Rational(2, 5), 10, Rational(1, 16), true);
  CHECK(sp.symmetric_mode());
  CHECK(sp.slot_count() == 10u + 1u + 2u);  // d+1 inner classes, slab class, remainder

  Rational total(0);
  for (std::size_t i = 0; i < sp.slot_count(); ++i) total += sp.slot_total_measure(i);
  CHECK(total == Rational(1));

  // class slot j carries binom(d,j) atoms of mass eps^j (1-eps)^(d-j) q0
  for (std::size_t i = 0; i < sp.slot_count(); ++i) {
    auto info = sp.slot(i);
    if (info.kind != AtomId::Kind::inner) continue;
    long j = info.inner_size;
    Rational atom = Rational(2, 5).pow(j) * Rational(3, 5).pow(10 - j) * sp.q0_measure();
    CHECK(sp.slot_atom_measure(i) == atom);
    CHECK(sp.slot_total_measure(i) == Rational::binom(10, j) * atom);
    CHECK(info.multiplicity == 0u);  // class counts live in Rational::binom, not the slot
  }

  // aggregates agree with enumerated storage at the same parameters
  auto en = build_atom_space(Rational(2, 5), 10, Rational(1, 16), false);
  CHECK(shadow_measure(sp) == shadow_measure(en));
  CHECK(sp.remainder_measure() == en.remainder_measure());
}

TEST_CASE("slot_total_measure_f64 tracks exact values and survives huge d") {
  auto sp = build_atom_space(Rational(1, 3), 20, Rational(1, 64), true);
  for (std::size_t i = 0; i < sp.slot_count(); ++i) {
    double ex = sp.slot_total_measure(i).to_double();
    CHECK(sp.slot_total_measure_f64(i) == doctest::Approx(ex).epsilon(1e-12));
  }
  // d far beyond anything representable as a flat table
  auto big = build_atom_space(Rational(1, 2), 1 << 20, Rational::pow2(-21), true);
  double sum = 0;
  for (std::size_t i = 0; i < big.slot_count(); ++i) sum += big.slot_total_measure_f64(i);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("step functions store and integrate exactly") {
  auto sp = half_two();
  auto f = StepFunction::zeros(sp, NumericMode::exact);
  CHECK(f.mode() == NumericMode::exact);
  f.set(AtomId::inner(0b11), Rational(3, 2));
  f.set(AtomId::outer_slab(2), Rational(1, 4));
  CHECK(f.value_exact(AtomId::inner(0b11)) == Rational(3, 2));
  CHECK(f.value_exact(AtomId::inner(0b00)) == Rational(0));
  CHECK(integrate(f) == Rational(3, 2) * Rational(1, 24) + Rational(1, 4) * Rational(1, 12));

  auto one_q0 = indicator_q0(sp);
  CHECK(integrate(one_q0) == sp.q0_measure());
  CHECK(one_q0.nonnegative());

  // height function: |E| on Inner(E), 1 on slabs; integral telescopes to d q0
  auto h = height_function(sp);
  CHECK(integrate(h) == Rational(2) * sp.q0_measure());
  CHECK(integrate(h, one_q0) == sp.eps() * Rational(2) * sp.q0_measure());

  auto g = Rational(2, 3) * h + one_q0;
  CHECK(integrate(g) == Rational(2, 3) * Rational(2) * sp.q0_measure() + sp.q0_measure());
}

TEST_CASE("binary64 copies agree with exact integrals") {
  auto sp = build_atom_space(Rational(1, 3), 6, Rational(1, 16), std::nullopt);
  auto h = height_function(sp);
  auto hf = h.to_f64();
  CHECK(hf.mode() == NumericMode::binary64);
  CHECK(integrate_f64(hf) == doctest::Approx(integrate(h).to_double()).epsilon(1e-13));
  CHECK(hf.value_f64(AtomId::inner(0b101)) == 2.0);
}

TEST_CASE("class setters write whole classes") {
  auto sp = build_atom_space(Rational(1, 4), 40, Rational(1, 128), true);
  auto f = StepFunction::zeros(sp, NumericMode::exact);
  f.set_inner_class(3, Rational(5, 7));
  f.set_all_slabs(Rational(1, 3));
  f.set_remainder(Rational(0));
  Rational class3 = Rational::binom(40, 3) * Rational(1, 4).pow(3) * Rational(3, 4).pow(37) *
                    sp.q0_measure();
  Rational slabs = Rational(40) * Rational(3, 4) * sp.q0_measure();
  CHECK(integrate(f) == Rational(5, 7) * class3 + Rational(1, 3) * slabs);

  // per-atom writes are not representable in symmetric storage
  CHECK_THROWS_AS(f.set(AtomId::inner(0b111), Rational(1)), Error);
}

TEST_CASE("slot_of round-trips slot metadata") {
  auto sp = half_two();
  for (std::size_t i = 0; i < sp.slot_count(); ++i) {
    auto info = sp.slot(i);
    AtomId id = info.kind == AtomId::Kind::inner      ? AtomId::inner(info.mask)
                : info.kind == AtomId::Kind::outer_slab ? AtomId::outer_slab(info.slab_k)
                                                        : AtomId::remainder();
    CHECK(sp.slot_of(id) == i);
  }
}
