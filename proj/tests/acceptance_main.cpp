// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Each scenario also carries a wall-clock budget.
#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "calderon/format.hpp"
#include "calderon/verify.hpp"

int main() {
  using Clock = std::chrono::steady_clock;
  using calderon::verify::Criterion;

  struct Budget {
    const char* id;
    double seconds;
  };
  // wall-clock limits per scenario
  const std::vector<Budget> budgets = {
      {"lambda0-closed-forms", 1.0}, {"flat-spectrum", 5.0},
      {"isospectral-metrics-2d", 60.0},            {"conformal-potential-identity", 5.0},
      {"cross-component-3d", 60.0},  {"residue-mittag-leffler", 30.0},
      {"schrodinger-3d", 60.0},      {"conformal-schrodinger-link", 30.0},
      {"structural-suite", 120.0},
  };

  bool all_pass = true;
  for (const auto& b : budgets) {
    const auto t0 = Clock::now();
    calderon::verify::ComparisonReport rep;
    try {
      rep = calderon::verify::run_scenario(b.id);
    } catch (const std::exception& e) {
      std::printf("FAIL  %s  (exception: %s)\n", b.id, e.what());
      all_pass = false;
      continue;
    }
    const double elapsed =
        std::chrono::duration<double>(Clock::now() - t0).count();
    for (const auto& c : rep.criteria) {
      std::printf("%s  %s.%s  value=%s %s %s%s%s\n", c.pass ? "PASS" : "FAIL", b.id,
                  c.name.c_str(), calderon::io::format_double(c.value).c_str(),
                  c.sense == Criterion::Sense::Less ? "<" : ">",
                  calderon::io::format_double(c.tolerance).c_str(),
                  c.where.empty() ? "" : "  at ", c.where.c_str());
      all_pass = all_pass && c.pass;
    }
    const bool in_budget = elapsed < b.seconds;
    std::printf("%s  %s.runtime  %.2fs < %.0fs\n", in_budget ? "PASS" : "FAIL", b.id, elapsed,
                b.seconds);
    all_pass = all_pass && in_budget;
  }
  std::printf("%s\n", all_pass ? "ACCEPTANCE: all criteria pass" : "ACCEPTANCE: FAILURES");
  return all_pass ? 0 : 1;
}
