#include "toruslab/oracle.hpp"

#include <algorithm>
#include <bit>
#include <map>

#include "toruslab/errors.hpp"

namespace toruslab {

namespace {

constexpr long long kCellCap = 100000000;  // 10^8

long rational_to_cells(const Rational& x, long nc) {
  // x * nc must be a whole number of cells (alignment is validated upstream,
  // so a failure here means the grid construction itself is wrong).
  const Rational scaled = x * Rational(nc);
  if (scaled.den() != 1) throw NonAlignable("quantity is not a whole number of cells");
  if (!scaled.num().fits_slong_p()) throw ResolutionOverflow("cell index exceeds long");
  return scaled.num().get_si();
}

// Normalizes [start, start+len) mod nc into 1 or 2 in-bounds ranges.
std::vector<AxisRange> wrap_ranges(long start, long len, long nc) {
  start %= nc;
  if (start < 0) start += nc;
  if (len >= nc) return {{0, nc}};
  if (start + len <= nc) return {{start, len}};
  return {{start, nc - start}, {0, start + len - nc}};
}

bool ranges_contain(const std::vector<AxisRange>& rs, long c) {
  for (const auto& r : rs)
    if (c >= r.start && c < r.start + r.len) return true;
  return false;
}

// Shared scan result: exact cell counts keyed by the box-membership mask
// (bit 0 = Q0, bit k = Q_k), plus the bulk count of cells in no box.
struct MaskHistogram {
  std::map<std::uint64_t, long long> counts;
  long long uncovered = 0;
};

MaskHistogram scan_grid(const GridModel& grid) {
  const long n = grid.n;
  // Per-axis membership masks.
  std::vector<std::vector<std::uint64_t>> table(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    auto& col = table[static_cast<std::size_t>(i)];
    col.assign(static_cast<std::size_t>(grid.cells[static_cast<std::size_t>(i)]), 0);
    for (std::size_t b = 0; b < grid.boxes.size(); ++b)
      for (const auto& r : grid.boxes[b].per_axis[static_cast<std::size_t>(i)])
        for (long c = r.start; c < r.start + r.len; ++c)
          col[static_cast<std::size_t>(c)] |= std::uint64_t{1} << b;
  }
  // Suffix products for bulk-counting pruned subtrees.
  std::vector<long long> suffix(static_cast<std::size_t>(n) + 1, 1);
  for (long i = n - 1; i >= 0; --i)
    suffix[static_cast<std::size_t>(i)] =
        suffix[static_cast<std::size_t>(i) + 1] * grid.cells[static_cast<std::size_t>(i)];

  MaskHistogram hist;
  const std::uint64_t all = grid.boxes.size() == 64
                                ? ~std::uint64_t{0}
                                : (std::uint64_t{1} << grid.boxes.size()) - 1;
  // Odometer over axes; prefix AND of the axis masks prunes dead subtrees.
  auto walk = [&](auto&& self, long axis, std::uint64_t mask) -> void {
    if (mask == 0) {
      hist.uncovered += suffix[static_cast<std::size_t>(axis)];
      return;
    }
    if (axis == n) {
      ++hist.counts[mask];
      return;
    }
    const auto& col = table[static_cast<std::size_t>(axis)];
    for (std::uint64_t axis_mask : col) self(self, axis + 1, mask & axis_mask);
  };
  walk(walk, 0, all);
  return hist;
}

Rational count_measure(const GridModel& grid, long long ncells) {
  return Rational(ncells) * grid.cell;
}

// f's value on the atom behind a membership mask.
Rational value_on_mask(const StepFunction& f, std::uint64_t mask) {
  if (mask & 1) return f.value_exact(AtomId::inner(mask >> 1));
  if (std::popcount(mask) == 1)
    return f.value_exact(AtomId::outer_slab(std::countr_zero(mask)));
  throw Error("cell lies in two shifted boxes but not the base rectangle");
}

void check_function(const GridModel& grid, const StepFunction& f) {
  if (f.mode() != NumericMode::exact) throw Error("oracle needs an exact-mode function");
  const AtomSpace& s = f.space();
  if (s.d() != grid.cfg.d || !(s.eps() == grid.cfg.eps) ||
      !(s.q0_measure() == grid.cfg.q0_measure()))
    throw SpaceMismatch("function space does not match the grid configuration");
}

}  // namespace

GridModel build_grid(const ConfigSpec& cfg) {
  validate_config(cfg);
  GridModel grid;
  grid.cfg = cfg;
  grid.n = static_cast<long>(cfg.exponents.size());
  if (cfg.d > 63) throw ResolutionOverflow("membership masks support at most 63 shifts");

  if (!cfg.eps.den().fits_slong_p()) throw ResolutionOverflow("eps denominator too large");
  const long b = cfg.eps.den().get_si();
  const long a = [&] {
    if (!cfg.eps.num().fits_slong_p()) throw ResolutionOverflow("eps numerator too large");
    return cfg.eps.num().get_si();
  }();

  long long total = 1;
  grid.cells.reserve(static_cast<std::size_t>(grid.n));
  for (long i = 0; i < grid.n; ++i) {
    const long long nc = (1LL << cfg.exponents[static_cast<std::size_t>(i)]) * b;
    total *= nc;  // every factor >= 2, so the cap trips long before overflow
    if (total > kCellCap) throw ResolutionOverflow("grid would exceed 10^8 cells");
    grid.cells.push_back(static_cast<long>(nc));
  }
  grid.cell = Rational(1) / Rational(static_cast<long>(total));

  // Box 0 = Q0: translation + b cells per axis.  Box k shifts axis k-1 by
  // b-a further cells.
  const std::vector<Rational>& t = cfg.translation;
  std::vector<long> base(static_cast<std::size_t>(grid.n));
  for (long i = 0; i < grid.n; ++i)
    base[static_cast<std::size_t>(i)] =
        rational_to_cells(t[static_cast<std::size_t>(i)], grid.cells[static_cast<std::size_t>(i)]);

  for (long k = 0; k <= cfg.d; ++k) {
    GridBox box;
    box.per_axis.reserve(static_cast<std::size_t>(grid.n));
    for (long i = 0; i < grid.n; ++i) {
      long start = base[static_cast<std::size_t>(i)];
      if (k >= 1 && i == k - 1) start += b - a;
      box.per_axis.push_back(wrap_ranges(start, b, grid.cells[static_cast<std::size_t>(i)]));
    }
    grid.boxes.push_back(std::move(box));
  }
  return grid;
}

OracleMeasures oracle_measures(const GridModel& grid) {
  const MaskHistogram hist = scan_grid(grid);
  const long d = grid.cfg.d;
  OracleMeasures out;
  out.qk.assign(static_cast<std::size_t>(d) + 1, Rational(0));
  out.q0_and_qk.assign(static_cast<std::size_t>(d) + 1, Rational(0));
  out.slab.assign(static_cast<std::size_t>(d) + 1, Rational(0));
  out.inner_class.assign(static_cast<std::size_t>(d) + 1, Rational(0));
  out.inner_by_mask.assign(std::size_t{1} << d, Rational(0));
  out.pairwise.assign(static_cast<std::size_t>(d) + 1,
                      std::vector<Rational>(static_cast<std::size_t>(d) + 1, Rational(0)));

  long long covered_cells = 0;
  for (const auto& [mask, cells] : hist.counts) {
    const Rational m = count_measure(grid, cells);
    covered_cells += cells;
    const bool in_q0 = (mask & 1) != 0;
    const std::uint64_t shifted = mask >> 1;
    if (in_q0) {
      out.q0 = out.q0 + m;
      out.inner_class[static_cast<std::size_t>(std::popcount(shifted))] =
          out.inner_class[static_cast<std::size_t>(std::popcount(shifted))] + m;
      out.inner_by_mask[static_cast<std::size_t>(shifted)] =
          out.inner_by_mask[static_cast<std::size_t>(shifted)] + m;
    } else if (std::popcount(shifted) >= 2) {
      out.pair_outside_q0 = out.pair_outside_q0 + m;
    }
    if (shifted != 0) out.shadow = out.shadow + m;
    for (long k = 1; k <= d; ++k) {
      if (!(shifted & (std::uint64_t{1} << (k - 1)))) continue;
      out.qk[static_cast<std::size_t>(k)] = out.qk[static_cast<std::size_t>(k)] + m;
      if (in_q0)
        out.q0_and_qk[static_cast<std::size_t>(k)] =
            out.q0_and_qk[static_cast<std::size_t>(k)] + m;
      else
        out.slab[static_cast<std::size_t>(k)] = out.slab[static_cast<std::size_t>(k)] + m;
      for (long j = 1; j <= d; ++j)
        if (j != k && (shifted & (std::uint64_t{1} << (j - 1))))
          out.pairwise[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
              out.pairwise[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] + m;
    }
  }
  out.covered = count_measure(grid, covered_cells);
  out.remainder = count_measure(grid, hist.uncovered);
  return out;
}

AtomId oracle_classify_cell(const GridModel& grid, const std::vector<long>& cell) {
  if (static_cast<long>(cell.size()) != grid.n) throw Error("cell coordinate count mismatch");
  std::uint64_t mask = 0;
  for (std::size_t b = 0; b < grid.boxes.size(); ++b) {
    bool in = true;
    for (long i = 0; i < grid.n && in; ++i)
      in = ranges_contain(grid.boxes[b].per_axis[static_cast<std::size_t>(i)],
                          cell[static_cast<std::size_t>(i)]);
    if (in) mask |= std::uint64_t{1} << b;
  }
  if (mask & 1) return AtomId::inner(mask >> 1);
  if (mask != 0) return AtomId::outer_slab(std::countr_zero(mask >> 1) + 1);
  return AtomId::remainder();
}

Rational oracle_box_integral(const GridModel& grid, const StepFunction& f, long k) {
  check_function(grid, f);
  if (k < 0 || k > grid.cfg.d) throw Error("box index out of range");
  const MaskHistogram hist = scan_grid(grid);
  Rational acc(0);
  for (const auto& [mask, cells] : hist.counts)
    if (mask & (std::uint64_t{1} << k))
      acc = acc + value_on_mask(f, mask) * count_measure(grid, cells);
  return acc;
}

Rational oracle_average(const GridModel& grid, const StepFunction& f, long k) {
  return oracle_box_integral(grid, f, k) / grid.cfg.q0_measure();
}

Rational oracle_maximal_superlevel(const GridModel& grid, const StepFunction& f,
                                   const Rational& lambda) {
  check_function(grid, f);
  const MaskHistogram hist = scan_grid(grid);
  const long d = grid.cfg.d;

  // Box averages once, exactly.
  std::vector<Rational> avg(static_cast<std::size_t>(d) + 1, Rational(0));
  std::vector<Rational> boxmass(static_cast<std::size_t>(d) + 1, Rational(0));
  std::vector<Rational> boxint(static_cast<std::size_t>(d) + 1, Rational(0));
  for (const auto& [mask, cells] : hist.counts) {
    const Rational m = count_measure(grid, cells);
    const Rational v = value_on_mask(f, mask);
    for (long k = 1; k <= d; ++k)
      if (mask & (std::uint64_t{1} << k)) {
        boxmass[static_cast<std::size_t>(k)] = boxmass[static_cast<std::size_t>(k)] + m;
        boxint[static_cast<std::size_t>(k)] = boxint[static_cast<std::size_t>(k)] + v * m;
      }
  }
  for (long k = 1; k <= d; ++k) {
    if (boxmass[static_cast<std::size_t>(k)].is_zero()) throw Error("empty box on the grid");
    avg[static_cast<std::size_t>(k)] =
        boxint[static_cast<std::size_t>(k)] / boxmass[static_cast<std::size_t>(k)];
  }

  Rational meas(0);
  for (const auto& [mask, cells] : hist.counts) {
    bool any = false;
    Rational best(0);
    for (long k = 1; k <= d; ++k)
      if (mask & (std::uint64_t{1} << k)) {
        if (!any || best < avg[static_cast<std::size_t>(k)]) best = avg[static_cast<std::size_t>(k)];
        any = true;
      }
    if (best > lambda) meas = meas + count_measure(grid, cells);
  }
  if (Rational(0) > lambda) meas = meas + count_measure(grid, hist.uncovered);
  return meas;
}

void for_each_cell(const GridModel& grid,
                   const std::function<void(const std::vector<long>&, std::uint64_t)>& fn) {
  long long total = 1;
  for (long nc : grid.cells) total *= nc;
  if (total > 1000000) throw ResolutionOverflow("full cell walk capped at 10^6 cells");

  std::vector<long> cell(static_cast<std::size_t>(grid.n), 0);
  auto walk = [&](auto&& self, long axis) -> void {
    if (axis == grid.n) {
      std::uint64_t mask = 0;
      for (std::size_t b = 0; b < grid.boxes.size(); ++b) {
        bool in = true;
        for (long i = 0; i < grid.n && in; ++i)
          in = ranges_contain(grid.boxes[b].per_axis[static_cast<std::size_t>(i)],
                              cell[static_cast<std::size_t>(i)]);
        if (in) mask |= std::uint64_t{1} << b;
      }
      fn(cell, mask);
      return;
    }
    for (long c = 0; c < grid.cells[static_cast<std::size_t>(axis)]; ++c) {
      cell[static_cast<std::size_t>(axis)] = c;
      self(self, axis + 1);
    }
  };
  walk(walk, 0);
}

}  // namespace toruslab
