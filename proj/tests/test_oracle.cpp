#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "toruslab/oracle.hpp"
#include "toruslab/maximal.hpp"

#include <cstdint>
#include <map>

using namespace toruslab;

TEST_CASE("grid layout for the first configurations") {
  auto g2 = build_grid(make_config(Rational(1, 2), 2));
  CHECK(g2.n == 2);
  CHECK(g2.cells == std::vector<long>{4, 4});
  CHECK(g2.cell == Rational(1, 16));

  auto g3 = build_grid(make_config(Rational(1, 4), 3));
  CHECK(g3.cells == std::vector<long>{16, 16, 8});

  // non-dyadic eps: step 1/6 on a level-1 axis
  auto g1 = build_grid(make_config(Rational(1, 3), 1));
  CHECK(g1.cells == std::vector<long>{6});
  CHECK(g1.cell == Rational(1, 6));

  // cell budget: prime denominator blows past 10^8 cells in four axes
  CHECK_THROWS_AS(build_grid(make_config(Rational(1, 97), 4)), ResolutionOverflow);
}

TEST_CASE("cell classification matches the atom picture") {
  auto grid = build_grid(make_config(Rational(1, 2), 2));
  // Q0 spans cells [0,2) on both axes; Q_k is shifted by one cell on axis k
  CHECK(oracle_classify_cell(grid, {0, 0}).kind == AtomId::Kind::inner);
  CHECK(oracle_classify_cell(grid, {0, 0}).index == 0u);
  CHECK(oracle_classify_cell(grid, {1, 0}).index == 0b01u);
  CHECK(oracle_classify_cell(grid, {1, 1}).index == 0b11u);
  CHECK(oracle_classify_cell(grid, {0, 1}).index == 0b10u);
  auto slab = oracle_classify_cell(grid, {2, 0});
  CHECK(slab.kind == AtomId::Kind::outer_slab);
  CHECK(slab.index == 1u);
  CHECK(oracle_classify_cell(grid, {3, 3}).kind == AtomId::Kind::remainder);
}

TEST_CASE("oracle measures equal the closed forms") {
  auto cfg = make_config(Rational(1, 2), 2);
  auto grid = build_grid(cfg);
  auto om = oracle_measures(grid);
  auto sp = config_to_atom_space(cfg);

  CHECK(om.q0 == Rational(1, 4));
  CHECK(om.shadow == Rational(7, 16));
  CHECK(om.shadow == shadow_measure(sp));
  CHECK(om.covered == om.q0 + om.shadow - (om.q0 - om.inner_class[0]));
  CHECK(om.remainder == sp.remainder_measure());
  CHECK(om.pair_outside_q0 == Rational(0));
  for (long k = 1; k <= 2; ++k) {
    CHECK(om.qk[static_cast<std::size_t>(k)] == om.q0);
    CHECK(om.q0_and_qk[static_cast<std::size_t>(k)] == Rational(1, 2) * om.q0);
    CHECK(om.slab[static_cast<std::size_t>(k)] == Rational(1, 2) * om.q0);
  }
  CHECK(om.pairwise[1][2] == Rational(1, 4) * om.q0);  // eps^2 q0

  // per-atom masses match the product formula
  REQUIRE(om.inner_by_mask.size() == 4);
  for (std::uint64_t m = 0; m < 4; ++m)
    CHECK(om.inner_by_mask[m] == sp.atom_measure(AtomId::inner(m)));
}

TEST_CASE("translation with wraparound changes nothing measurable") {
  auto cfg = make_config(Rational(1, 2), 2);
  // aligned shift by half a period: Q1 = [3/4, 5/4) wraps around the seam
  cfg.translation = {Rational(1, 2), Rational(0)};
  auto om = oracle_measures(build_grid(cfg));
  CHECK(om.q0 == Rational(1, 4));
  CHECK(om.shadow == Rational(7, 16));
  CHECK(om.q0_and_qk[1] == Rational(1, 8));
  CHECK(om.inner_by_mask[0b11] == Rational(1, 16));
}

TEST_CASE("box integrals and averages agree with the atom algebra") {
  auto cfg = make_config(Rational(1, 2), 2);
  auto grid = build_grid(cfg);
  auto sp = config_to_atom_space(cfg);

  auto h = height_function(sp);
  CHECK(oracle_box_integral(grid, h, 0) == integrate(h, indicator_q0(sp)));
  // <h>_{Q_k} = 1 + eps^2 (d-1) at d = 2
  CHECK(oracle_average(grid, h, 1) == Rational(5, 4));
  CHECK(oracle_box_integral(grid, h, 1) == Rational(5, 16));

  auto mr = apply_maximal(h);
  for (long k = 1; k <= 2; ++k)
    CHECK(oracle_average(grid, h, k) == mr.averages_exact[static_cast<std::size_t>(k - 1)]);

  // a function living on another space is rejected
  auto other = build_atom_space(Rational(1, 4), 2, Rational(1, 16), std::nullopt);
  CHECK_THROWS_AS(oracle_box_integral(grid, indicator_q0(other), 0), SpaceMismatch);
}

TEST_CASE("cellwise maximal superlevels match the atom computation") {
  auto cfg = make_config(Rational(1, 2), 2);
  auto grid = build_grid(cfg);
  auto sp = config_to_atom_space(cfg);

  auto f = indicator_q0(sp);
  CHECK(oracle_maximal_superlevel(grid, f, Rational(1, 4)) == Rational(7, 16));
  CHECK(oracle_maximal_superlevel(grid, f, Rational(1, 2)) == Rational(0));

  auto single = extremal_function(sp, ExtremalKind::single, 2.0);
  CHECK(oracle_maximal_superlevel(grid, single, Rational(1, 2)) == Rational(1, 4));

  auto mr = apply_maximal(f);
  for (const Rational& lam : {Rational(0), Rational(1, 8), Rational(3, 8)})
    CHECK(oracle_maximal_superlevel(grid, f, lam) == superlevel_measure(mr.mf, lam));
}

TEST_CASE("for_each_cell visits the whole torus once") {
  auto grid = build_grid(make_config(Rational(1, 2), 2));
  long count = 0;
  std::map<std::uint64_t, long> by_mask;
  for_each_cell(grid, [&](const std::vector<long>& cell, std::uint64_t mask) {
    REQUIRE(cell.size() == 2);
    ++count;
    by_mask[mask] += 1;
  });
  CHECK(count == 16);
  CHECK(by_mask[0b001u] == 1);  // Q0 only
  CHECK(by_mask[0b011u] == 1);  // Q0 and Q1
  CHECK(by_mask[0b111u] == 1);  // all three boxes
  CHECK(by_mask[0b000u] == 8);  // remainder
  CHECK(by_mask[0b010u] == 2);  // slab of Q1
  // mask bit k <-> membership in Q_k, consistent with the classifier
  for_each_cell(grid, [&](const std::vector<long>& cell, std::uint64_t mask) {
    auto id = oracle_classify_cell(grid, cell);
    if ((mask & 1u) != 0)
      CHECK(id.index == (mask >> 1));
    else
      CHECK((id.kind == AtomId::Kind::outer_slab || id.kind == AtomId::Kind::remainder));
  });
}
