#pragma once

#include "exitctl/sampler.hpp"
#include "exitctl/stats.hpp"

#include <filesystem>
#include <vector>

namespace exitctl {

// phi^{sigma,x}(u): mean of K^{sigma,u,0}.
EstimatorResult estimate_functional(const BatchStats& batch, double sigma);

enum class FirstVariationForm {
  compact,   // K^{sigma,u,1} M^phi
  h_form,    // K^{sigma,u,0} M^phi + <M^u, M^phi> / sigma
  centered,  // (K^{sigma,u,1} - mean K^{sigma,u,1}) M^phi
};

struct FirstVariation : EstimatorResult {
  double compact_mean = 0.0;
  double h_form_mean = 0.0;
  // |compact - h_form| and the standard error of the paired difference.
  double discrepancy = 0.0;
  double discrepancy_se = 0.0;
};

FirstVariation estimate_first_variation(const BatchStats& batch, double sigma, std::size_t i,
                                         FirstVariationForm form = FirstVariationForm::compact);

// Per-path h^{phi_i phi_j}.
double second_variation_sample(const PathStats& p, double sigma, std::size_t i, std::size_t j);
EstimatorResult estimate_second_variation(const BatchStats& batch, double sigma, std::size_t i, std::size_t j);

struct GradHess {
  std::size_t n = 0;
  std::vector<double> grad, grad_se;
  std::vector<double> hess, hess_se;  // n x n row-major, exactly symmetric
  double h(std::size_t i, std::size_t j) const { return hess[i * n + j]; }
};

GradHess estimate_gradient_hessian(const BatchStats& batch, double sigma,
                                   FirstVariationForm form = FirstVariationForm::compact);

// z . h . z per path, i.e. the second variation along sum z_i phi_i.
EstimatorResult estimate_quadratic_form(const BatchStats& batch, double sigma, std::span<const double> z);
// <M^{u^z}>_tau with u^z = sum z_i phi_i.
EstimatorResult estimate_combined_qv(const BatchStats& batch, std::span<const double> z);
// z . h . z - gamma <M^{u^z}>_tau per path; nonnegative mean expected when gamma is the convexity constant.
EstimatorResult estimate_coercivity_margin(const BatchStats& batch, double sigma, std::span<const double> z,
                                           double gamma);

struct FdGradient {
  std::vector<double> value;
  std::vector<double> se;
};

// Central differences of the functional at a +- delta e_i with common random
// numbers: every evaluation replays the seeds cfg.seed .. cfg.seed + N - 1.
FdGradient fd_gradient_oracle(const ProblemSpec& spec, const BasisPtr& basis, const ControlVector& a, double sigma,
                              double delta, const SimConfig& cfg, std::size_t n_traj);

void write_gradient_csv(const GradHess& gh, const std::filesystem::path& path);
void write_hessian_csv(const GradHess& gh, const std::filesystem::path& path);

}  // namespace exitctl
