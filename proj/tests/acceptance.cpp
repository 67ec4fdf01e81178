// One line per acceptance criterion. The exit status is nonzero when a
// criterion fails that is not listed by criteria::known_failure.
#include <iostream>

#include "criteria/criteria.hpp"

int main() {
  int failed = 0, unexpected = 0;
  for (const auto& r : wdro::criteria::run_all()) {
    std::cout << wdro::criteria::format(r) << std::endl;
    if (!r.passed) {
      ++failed;
      if (!wdro::criteria::known_failure(r.id)) ++unexpected;
    }
  }
  std::cout << (10 - failed) << "/10 criteria passed";
  if (failed > unexpected) std::cout << "; " << failed - unexpected << " known failure(s), see README";
  std::cout << std::endl;
  return unexpected == 0 ? 0 : 1;
}
