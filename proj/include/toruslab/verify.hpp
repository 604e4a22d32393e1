#pragma once

#include <string>
#include <utility>
#include <vector>

namespace toruslab {

// One invariant suite: named, timed, pass/fail with a human-readable summary
// of the measured quantities.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  bool with_oracle = false;  // grid-vs-atom agreement suites (exact, slower)
  bool full_grid = true;     // false: subsampled grids for a fast smoke run
  int threads = 0;           // 0: TORUSLAB_THREADS, else hardware concurrency
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  // Measured universal constants (conformance bands, Latala ratio, endpoint
  // ceilings, ...) — recorded, with only the pinned ceilings asserted.
  std::vector<std::pair<std::string, double>> constants;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

using ConstantSink = std::vector<std::pair<std::string, double>>;

// The eight headline suites.  Each runs standalone; `constants` (optional)
// collects the measured band constants.
CheckResult check_exact_identities();
CheckResult check_oracle_equivalence();
CheckResult check_eta_equation(bool full_grid);
CheckResult check_regime_conformance(bool full_grid, int threads, ConstantSink* constants);
CheckResult check_rq_cases();
CheckResult check_endpoint(bool full_grid, int threads, ConstantSink* constants);
CheckResult check_families();
CheckResult check_basis_table();

// Further per-module invariant suites.
CheckResult check_maximal_invariants();
CheckResult check_conditioning();  // oracle-backed
CheckResult check_latala_equivalence(bool full_grid, ConstantSink* constants);
CheckResult check_search_sandwich();
CheckResult check_legendre_young(ConstantSink* constants);

// Worker count: explicit > 0 wins, then TORUSLAB_THREADS, then hardware.
int resolve_threads(int requested);

VerifyReport run_verify(const VerifyOptions& opt);

}  // namespace toruslab
