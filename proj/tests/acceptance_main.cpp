// Runs acceptance criteria by id (all when none are given) and prints one
// PASS/FAIL line each. Exit status is nonzero when any criterion fails.
#include "exitctl/acceptance.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  exitctl::AcceptanceOptions opt;
  opt.log = &std::cerr;
  if (argc > 1) {
    opt.criteria.clear();
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg.rfind("--seed=", 0) == 0) {
        opt.seed = std::stoull(arg.substr(7));
        continue;
      }
      opt.criteria.push_back(std::stoi(arg));
    }
    if (opt.criteria.empty()) opt.criteria = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  }
  opt.scratch_dir /= std::to_string(opt.criteria.front());
  bool all = true;
  for (int id : opt.criteria) {
    const auto r = exitctl::run_criterion(id, opt);
    std::cout << exitctl::format_criterion(r) << std::endl;
    all = all && r.passed;
  }
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
