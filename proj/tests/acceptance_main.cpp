// Acceptance harness: runs the eight headline checks, one line each, and
// exits nonzero if any fails or overruns its wall-clock budget.  Budgets are
// pinned here; the per-check tolerances live in the library.

#include "toruslab/verify.hpp"

#include <cstdio>
#include <vector>

using toruslab::CheckResult;
using toruslab::ConstantSink;

int main() {
  struct Row {
    const char* label;
    CheckResult result;
    double budget_s;  // 0 = no budget
  };

  ConstantSink constants;
  std::vector<Row> rows;
  rows.push_back({"exact-identities", toruslab::check_exact_identities(), 10.0});
  rows.push_back({"oracle-equivalence", toruslab::check_oracle_equivalence(), 30.0});
  rows.push_back({"eta-equation", toruslab::check_eta_equation(true), 0.0});
  rows.push_back({"regime-conformance", toruslab::check_regime_conformance(true, 0, &constants), 60.0});
  rows.push_back({"rq-cases", toruslab::check_rq_cases(), 0.0});
  rows.push_back({"endpoint-llogl", toruslab::check_endpoint(true, 0, &constants), 0.0});
  rows.push_back({"families", toruslab::check_families(), 0.0});
  rows.push_back({"basis-table", toruslab::check_basis_table(), 0.0});

  bool all_pass = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    bool pass = row.result.pass;
    bool in_budget = row.budget_s == 0.0 || row.result.seconds < row.budget_s;
    all_pass = all_pass && pass && in_budget;
    std::printf("[%zu/8] %-20s %s  %6.2fs", i + 1, row.label, pass && in_budget ? "PASS" : "FAIL",
                row.result.seconds);
    if (!in_budget) std::printf("  over budget (%.0fs)", row.budget_s);
    if (!row.result.detail.empty()) std::printf("  %s", row.result.detail.c_str());
    std::printf("\n");
  }

  if (!constants.empty()) {
    std::printf("measured constants:\n");
    for (const auto& kv : constants) std::printf("  %-24s %.6g\n", kv.first.c_str(), kv.second);
  }
  std::printf("%s\n", all_pass ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL");
  return all_pass ? 0 : 1;
}
