#pragma once

// Numbered acceptance checks. Each check runs its own experiments, times
// itself and reports one verdict.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cidal::checks {

struct CheckResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;  // 0: untimed
};

struct CheckSpec {
  int id = 0;
  std::string title;
  double time_limit = 0.0;
  bool slow = false;  // trains full task streams
  std::function<CheckResult(std::uint64_t seed)> run;
};

const std::vector<CheckSpec>& all_checks();

// Runs the spec, fills in timing and fails it when over its time limit.
CheckResult run_check(const CheckSpec& spec, std::uint64_t seed);

// "PASS  [3] title: detail (1.23 s)"
std::string format_result(const CheckResult& r);

}  // namespace cidal::checks
