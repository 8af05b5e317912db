#pragma once

#include "exitctl/model.hpp"
#include "exitctl/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace exitctl {

struct SimConfig {
  double dt = 1e-3;
  std::size_t max_steps = 10'000'000;
  std::uint64_t seed = 1;
  // Exit point on the last segment instead of the projection of X_{k+1}.
  bool exit_interpolation = true;
  // Brownian-bridge test between grid times; consumes one uniform per step either way.
  bool bridge_correction = true;
};

struct PathStats {
  double tau = 0.0;
  Point exit_point;
  double W = 0.0;
  double M_u = 0.0;
  double QV_u = 0.0;
  std::vector<double> M_probe;
  std::vector<double> QV_probe;  // m x m, row-major
  std::vector<double> CV_u_probe;
  std::size_t n_steps = 0;
  bool exited = false;

  double qv_probe(std::size_t i, std::size_t j) const { return QV_probe[i * M_probe.size() + j]; }
};

// Evaluates the control u(x) and the m probe fields at x in one call, so basis
// gradients can be computed once per step and shared.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::size_t probe_count() const = 0;
  // u: d entries; probes: m x d row-major.
  virtual void evaluate(std::span<const double> x, std::span<double> u, std::span<double> probes) const = 0;
};

// Arbitrary vector fields; a null control means u = 0.
class FieldController final : public Controller {
 public:
  FieldController(std::size_t d, VectorFieldPtr control, std::vector<VectorFieldPtr> probes = {});
  std::size_t dimension() const override { return d_; }
  std::size_t probe_count() const override { return probes_.size(); }
  void evaluate(std::span<const double> x, std::span<double> u, std::span<double> probes) const override;

 private:
  std::size_t d_;
  VectorFieldPtr control_;
  std::vector<VectorFieldPtr> probes_;
};

// u^a = sum a_i grad b_i, optionally with probes phi_i = grad b_i.
class BasisController final : public Controller {
 public:
  BasisController(BasisPtr basis, ControlVector a, bool with_probes);
  std::size_t dimension() const override { return basis_->dimension(); }
  std::size_t probe_count() const override { return with_probes_ ? basis_->size() : 0; }
  void evaluate(std::span<const double> x, std::span<double> u, std::span<double> probes) const override;

 private:
  BasisPtr basis_;
  ControlVector a_;
  bool with_probes_;
};

PathStats simulate_trajectory(const ProblemSpec& spec, const Controller& controller, const SimConfig& cfg,
                              std::uint64_t seed);
PathStats simulate_trajectory(const ProblemSpec& spec, const VectorFieldPtr& control,
                              const std::vector<VectorFieldPtr>& probes, const SimConfig& cfg);

struct BatchStats {
  std::vector<PathStats> paths;  // trajectory index order; seed = seed_base + index
  std::uint64_t seed_base = 0;
  std::size_t probe_count = 0;
  std::size_t n_exited = 0;
  std::size_t n_discarded = 0;
  EstimatorResult tau;
  EstimatorResult W;
  EstimatorResult M_u;
  EstimatorResult QV_u;
  std::vector<std::string> warnings;

  // Per-path values over exited paths, in index order.
  template <typename Fn>
  std::vector<double> collect(Fn&& fn) const {
    std::vector<double> out;
    out.reserve(n_exited);
    for (const auto& p : paths)
      if (p.exited) out.push_back(fn(p));
    return out;
  }
};

// Trajectories run in parallel (OpenMP); the result does not depend on the
// thread count.
BatchStats sample_batch(const ProblemSpec& spec, const Controller& controller, const SimConfig& cfg, std::size_t n);
// Single-threaded reference with identical output.
BatchStats sample_batch_serial(const ProblemSpec& spec, const Controller& controller, const SimConfig& cfg,
                               std::size_t n);

// Columns: seed, tau, W, M_u, QV_u, exited, exit_1..exit_d.
void write_trajectories_csv(const BatchStats& batch, std::size_t dimension, const std::filesystem::path& path);

}  // namespace exitctl
