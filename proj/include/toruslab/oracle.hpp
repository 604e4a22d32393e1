#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "toruslab/atom_space.hpp"
#include "toruslab/rational.hpp"
#include "toruslab/rubio_basis.hpp"

namespace toruslab {

// ---------------------------------------------------------------------------
// Brute-force oracle: recomputes every measure of a configuration by exact
// cell counting on the finite-dimensional projection.
//
// With eps = a/b reduced, axis i of the level gets N_i = 2^(l_i) b cells of
// width 1/N_i.  The base rectangle spans b whole cells per axis, the shift of
// Q_k along axis k is b-a whole cells, and aligned translations are whole
// cells too, so every box is a union of cells and all counts are exact.  The
// scan walks axes as an odometer and prunes any prefix no box can reach, so
// only covered cells are ever touched individually.
// ---------------------------------------------------------------------------

// Half-open cell range [start, start+len) on one axis; boxes wrap mod N_i
// into at most two ranges.
struct AxisRange {
  long start = 0;
  long len = 0;
};

struct GridBox {
  std::vector<std::vector<AxisRange>> per_axis;  // 1 or 2 ranges per axis
};

struct GridModel {
  ConfigSpec cfg;
  long n = 0;                // axes = coordinates of the level
  std::vector<long> cells;   // N_i per axis
  Rational cell;             // measure of one cell = 1 / prod N_i
  std::vector<GridBox> boxes;  // box 0 = Q0, boxes 1..d = Q_k
};

// Validates the configuration, then lays out the grid.  ResolutionOverflow
// once the total cell count would exceed 10^8; the box-membership masks also
// require d <= 63.
GridModel build_grid(const ConfigSpec& cfg);

// Everything the oracle can say about the raw geometry.  All exact.
struct OracleMeasures {
  Rational q0;                        // |Q0|
  std::vector<Rational> qk;           // |Q_k|, k = 1..d (index 0 unused)
  std::vector<Rational> q0_and_qk;    // |Q0 cap Q_k|
  Rational pair_outside_q0;           // mass in >= 2 shifted boxes minus Q0 (0 if slabs disjoint)
  std::vector<std::vector<Rational>> pairwise;  // |Q_j cap Q_k|, j,k in 1..d
  Rational shadow;                    // |union Q_k|
  Rational covered;                   // |Q0 cup union Q_k|
  Rational remainder;                 // 1 - covered
  std::vector<Rational> inner_class;  // mass of {x in Q0 covered exactly j times}, j = 0..d
  std::vector<Rational> slab;         // |Q_k minus Q0|
  std::vector<Rational> inner_by_mask;  // per-atom masses, indexed by E-mask (size 2^d)
};

OracleMeasures oracle_measures(const GridModel& grid);

// Atom containing the given cell (coordinates in cells, one per axis).
AtomId oracle_classify_cell(const GridModel& grid, const std::vector<long>& cell);

// Integral of f over box k (0 = Q0), with f realized cell-by-cell from its
// atom values.  f must be exact mode on a space matching the configuration.
Rational oracle_box_integral(const GridModel& grid, const StepFunction& f, long k);

// oracle_box_integral(k) / |Q_k|.
Rational oracle_average(const GridModel& grid, const StepFunction& f, long k);

// mu{ Mf > lambda } with Mf computed per cell: the max of the box averages
// over the shifted boxes containing the cell (0 on cells in none).
Rational oracle_maximal_superlevel(const GridModel& grid, const StepFunction& f,
                                   const Rational& lambda);

// Visits every cell (coordinates plus box-membership mask, bit 0 = Q0) in
// odometer order.  No pruning, so it is capped at 10^6 total cells; meant for
// cell-level cross-checks on refinements of the atom algebra.
void for_each_cell(const GridModel& grid,
                   const std::function<void(const std::vector<long>&, std::uint64_t)>& fn);

}  // namespace toruslab
