#pragma once

#include "exitctl/sampler.hpp"
#include "exitctl/variation.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace exitctl {

struct ConvexityCertificate {
  double gamma = 0.0;  // min kappa_t - 1/sigma over the boundary grid
  bool satisfied = false;
  double suggested_shift = 0.0;  // max(0, -gamma), added to kappa_t
  std::optional<double> m_x;
  std::optional<double> m_x_se;
};

ConvexityCertificate check_convexity_preconditions(const ProblemSpec& spec, const std::vector<Point>& boundary_grid);

struct CoercivityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t binding_sample = 0;
  std::size_t binding_probe = 0;
};

// min over sampled a of min over i of mean <M^{phi_i}>_tau under u^a.
CoercivityEstimate estimate_coercivity_constant(const ProblemSpec& spec, const BasisPtr& basis,
                                                const std::vector<ControlVector>& samples, const SimConfig& cfg,
                                                std::size_t n_traj);

struct StepSchedule {
  enum class Kind { fixed, backtracking };
  Kind kind = Kind::fixed;
  double h = 0.1;  // fixed step, or initial trial step
  double shrink = 0.5;
  double c1 = 1e-4;
  std::size_t max_backtracks = 20;
};

enum class SeedPolicy { fresh, frozen };

struct DescentConfig {
  ControlVector a0;
  std::size_t n_iter = 50;
  std::size_t n_traj = 1000;
  StepSchedule step;
  double grad_tol = 1e-3;
  // The stopping rule is not checked before this iteration index.
  std::size_t min_iter = 0;
  SeedPolicy seed_policy = SeedPolicy::fresh;
  std::uint64_t seed = 1;
  FirstVariationForm form = FirstVariationForm::compact;
  // Iterates from this index on are averaged (0 disables averaging).
  std::size_t averaging_start = 0;
  // Proceed although gamma <= 0.
  bool allow_nonconvex = false;
  // Resume support: index of a0 in the overall iteration count, and the
  // running average carried over from an earlier run.
  std::size_t start_iter = 0;
  std::vector<double> average_sum;
  std::size_t average_count = 0;
};

struct DescentRecord {
  std::size_t iter = 0;
  std::vector<double> a;
  double phi_hat = 0.0;
  double phi_se = 0.0;
  std::vector<double> grad;
  std::vector<double> grad_se;
  double grad_norm = 0.0;
  double grad_norm_se = 0.0;
  double step = 0.0;  // step taken from this iterate (0 for the last one)
  double variance_k1 = 0.0;
  double wall_time = 0.0;
};

struct DescentTrace {
  std::vector<DescentRecord> records;
  std::string status;  // "converged", "max_iter", "diverged", "stalled"
  std::string diagnostic;
  std::vector<std::string> warnings;
  std::vector<double> average_sum;
  std::size_t average_count = 0;
  std::optional<ControlVector> averaged() const;
};

std::uint64_t iteration_seed(const DescentConfig& cfg, std::size_t iter);

DescentTrace run_descent(const ProblemSpec& spec, const BasisPtr& basis, const DescentConfig& dcfg, const SimConfig& sim);

struct ConvergenceReport {
  double fitted_rate = 0.0;  // minus the slope of log |a - a_inf|^2 against elapsed step time
  double bound = 0.0;        // gamma * m_x
  bool trivial = false;
  bool pass = false;
  std::string detail;
};

ConvergenceReport convergence_diagnostics(const DescentTrace& trace, double gamma, double m_x,
                                          const ControlVector& a_inf);

// Columns: iter, a_1..a_n, phi_hat, phi_se, grad_norm, step.
void write_trace_csv(const DescentTrace& trace, const std::filesystem::path& path);
void write_checkpoint(const DescentTrace& trace, const DescentConfig& dcfg, const std::filesystem::path& path);
// Returns dcfg with a0, start_iter and the running average restored.
DescentConfig resume_from_checkpoint(const DescentConfig& dcfg, const std::filesystem::path& path);

}  // namespace exitctl
