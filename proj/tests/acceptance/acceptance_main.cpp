#include <cstdio>
#include <cstdlib>
#include <string>

#include "cidal/checks/criteria.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = 0;
  if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);

  int failed = 0;
  for (const auto& spec : cidal::checks::all_checks()) {
    const auto result = cidal::checks::run_check(spec, seed);
    std::printf("%s\n", cidal::checks::format_result(result).c_str());
    std::fflush(stdout);
    failed += result.passed ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(cidal::checks::all_checks().size()) - failed,
              cidal::checks::all_checks().size());
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
