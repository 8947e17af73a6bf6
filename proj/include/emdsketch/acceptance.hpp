#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace emdsketch {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  double limit_seconds = 0.0;
  std::string detail;
};

struct AcceptanceOptions {
  uint64_t seed = 20240601;
  std::string out_dir;        // when set, per-criterion CSV artifacts land here
  std::vector<int> only;      // empty = all criteria
};

// Runs the acceptance suite; one entry per criterion, in order.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

// "[PASS] C1 ..." lines.
std::string format_criterion(const CriterionResult& r);

}  // namespace emdsketch
