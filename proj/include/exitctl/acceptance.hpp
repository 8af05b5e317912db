#pragma once

#include "exitctl/model.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace exitctl {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;
  std::string tolerance;
  double seconds = 0.0;
  double time_limit = 0.0;  // seconds; 0 when the criterion has none
};

struct AcceptanceOptions {
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  std::uint64_t seed = 1;
  std::filesystem::path scratch_dir = std::filesystem::temp_directory_path() / "exitctl_acceptance";
  std::ostream* log = nullptr;  // progress notes
};

// V = 0 on (0,1), eps = 0.5, sigma = 1, kappa_r = 1, start 0.5.
ProblemSpec benchmark_b1(double kappa_t = 1.5);
// Double well (x^2 - 1)^2 on (-1.5, 1.5), eps = 0.25, sigma = 1, kappa_r = 1, kappa_t = 1.5, start 0.
ProblemSpec benchmark_b2();
// Eight Gaussian bumps centred on the cells of (-1.5, 1.5), width 0.7 x spacing.
BasisPtr benchmark_b2_basis();

CriterionResult run_criterion(int id, const AcceptanceOptions& opt);
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);

// "PASS [n] name: measured ...; tolerance ...; 1.2 s (limit 60 s)"
std::string format_criterion(const CriterionResult& r);

}  // namespace exitctl
