#include "exitctl/sampler.hpp"

#include "exitctl/csv.hpp"
#include "exitctl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace exitctl {

FieldController::FieldController(std::size_t d, VectorFieldPtr control, std::vector<VectorFieldPtr> probes)
    : d_(d), control_(std::move(control)), probes_(std::move(probes)) {
  if (control_ && control_->dimension() != d_) throw std::invalid_argument("control dimension mismatch");
  for (const auto& p : probes_)
    if (!p || p->dimension() != d_) throw std::invalid_argument("probe dimension mismatch");
}

void FieldController::evaluate(std::span<const double> x, std::span<double> u, std::span<double> probes) const {
  if (control_)
    control_->eval(x, u);
  else
    std::fill(u.begin(), u.end(), 0.0);
  for (std::size_t i = 0; i < probes_.size(); ++i) probes_[i]->eval(x, probes.subspan(i * d_, d_));
}

BasisController::BasisController(BasisPtr basis, ControlVector a, bool with_probes)
    : basis_(std::move(basis)), a_(std::move(a)), with_probes_(with_probes) {
  if (a_.size() != basis_->size())
    throw std::invalid_argument("control vector has length " + std::to_string(a_.size()) + ", basis has " +
                                std::to_string(basis_->size()));
}

void BasisController::evaluate(std::span<const double> x, std::span<double> u, std::span<double> probes) const {
  const std::size_t d = basis_->dimension();
  std::fill(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
  double g[16];
  for (std::size_t i = 0; i < basis_->size(); ++i) {
    if (!with_probes_ && a_.a[i] == 0.0) continue;
    std::span<double> gi = with_probes_ ? probes.subspan(i * d, d) : std::span<double>(g, d);
    (*basis_)[i].gradient(x, gi);
    for (std::size_t k = 0; k < d; ++k) u[k] += a_.a[i] * gi[k];
  }
}

PathStats simulate_trajectory(const ProblemSpec& spec, const Controller& controller, const SimConfig& cfg,
                              std::uint64_t seed) {
  const std::size_t d = spec.dimension;
  const std::size_t m = controller.probe_count();
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (controller.dimension() != d) throw std::invalid_argument("controller dimension mismatch");
  const Domain& domain = *spec.domain;
  if (!domain.contains(spec.start)) throw std::invalid_argument("start point is not interior");

  const double dt = cfg.dt;
  const double sqdt = std::sqrt(dt);
  const double noise = std::sqrt(2.0 * spec.epsilon);
  const double inv_noise = 1.0 / noise;
  const double qv_scale = dt / (2.0 * spec.epsilon);
  const double bridge_var = 2.0 * spec.epsilon * dt;

  PathStats s;
  s.M_probe.assign(m, 0.0);
  s.QV_probe.assign(m * m, 0.0);
  s.CV_u_probe.assign(m, 0.0);

  Point x = spec.start, next(d), u(d), grad(d), exit_point;
  std::vector<double> probes(m * d), z(d + 1), dB(d);
  const NoiseStream rng(seed);
  const ScalarField& kappa_r = *spec.running_cost;

  for (std::size_t k = 0; k < cfg.max_steps; ++k) {
    controller.evaluate(x, u, probes);
    spec.potential->gradient(x, grad);
    rng.uniforms(k, z);
    for (std::size_t c = 0; c < d; ++c) dB[c] = sqdt * inverse_normal_cdf(z[c]);

    s.W += kappa_r.value(x) * dt;
    double mu = 0.0, qu = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      mu += u[c] * dB[c];
      qu += u[c] * u[c];
    }
    s.M_u += inv_noise * mu;
    s.QV_u += qv_scale * qu;
    for (std::size_t i = 0; i < m; ++i) {
      const double* pi = probes.data() + i * d;
      double mi = 0.0, cu = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        mi += pi[c] * dB[c];
        cu += u[c] * pi[c];
      }
      s.M_probe[i] += inv_noise * mi;
      s.CV_u_probe[i] += qv_scale * cu;
      for (std::size_t j = i; j < m; ++j) {
        const double* pj = probes.data() + j * d;
        double q = 0.0;
        for (std::size_t c = 0; c < d; ++c) q += pi[c] * pj[c];
        s.QV_probe[i * m + j] += qv_scale * q;
      }
    }
    for (std::size_t c = 0; c < d; ++c) next[c] = x[c] + (u[c] - grad[c]) * dt + noise * dB[c];

    bool exited = false;
    if (!domain.contains(next)) {
      exit_point = cfg.exit_interpolation ? domain.segment_exit_point(x, next) : domain.nearest_boundary_point(next);
      exited = true;
    } else if (cfg.bridge_correction) {
      const double p = domain.bridge_exit_probability(x, next, bridge_var, exit_point);
      exited = p > 0.0 && z[d] < p;
    }
    if (exited) {
      s.exited = true;
      s.n_steps = k + 1;
      s.tau = static_cast<double>(k + 1) * dt;
      s.exit_point = exit_point;
      s.W += spec.terminal_cost->value(exit_point);
      break;
    }
    x.swap(next);
  }
  if (!s.exited) {
    s.n_steps = cfg.max_steps;
    s.tau = static_cast<double>(cfg.max_steps) * dt;
    s.exit_point = x;
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < i; ++j) s.QV_probe[i * m + j] = s.QV_probe[j * m + i];
  return s;
}

PathStats simulate_trajectory(const ProblemSpec& spec, const VectorFieldPtr& control,
                              const std::vector<VectorFieldPtr>& probes, const SimConfig& cfg) {
  return simulate_trajectory(spec, FieldController(spec.dimension, control, probes), cfg, cfg.seed);
}

namespace {

void finalize(BatchStats& b) {
  b.n_exited = static_cast<std::size_t>(std::count_if(b.paths.begin(), b.paths.end(), [](const PathStats& p) { return p.exited; }));
  b.n_discarded = b.paths.size() - b.n_exited;
  if (b.n_exited == 0) throw std::runtime_error("no exits; increase max_steps");
  if (b.n_discarded > 0)
    b.warnings.push_back(std::to_string(b.n_discarded) + " of " + std::to_string(b.paths.size()) +
                         " trajectories reached max_steps and were discarded");
  b.tau = summarize(b.collect([](const PathStats& p) { return p.tau; }), b.n_discarded);
  b.W = summarize(b.collect([](const PathStats& p) { return p.W; }), b.n_discarded);
  b.M_u = summarize(b.collect([](const PathStats& p) { return p.M_u; }), b.n_discarded);
  b.QV_u = summarize(b.collect([](const PathStats& p) { return p.QV_u; }), b.n_discarded);
}

BatchStats prepare(const ProblemSpec& spec, const Controller& controller, const SimConfig& cfg, std::size_t n) {
  if (n == 0) throw std::invalid_argument("batch size must be at least 1");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (controller.dimension() != spec.dimension) throw std::invalid_argument("controller dimension mismatch");
  if (!spec.domain->contains(spec.start)) throw std::invalid_argument("start point is not interior");
  BatchStats b;
  b.paths.resize(n);
  b.seed_base = cfg.seed;
  b.probe_count = controller.probe_count();
  return b;
}

}  // namespace

BatchStats sample_batch(const ProblemSpec& spec, const Controller& controller, const SimConfig& cfg, std::size_t n) {
  BatchStats b = prepare(spec, controller, cfg, n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  std::string failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      b.paths[static_cast<std::size_t>(i)] =
          simulate_trajectory(spec, controller, cfg, cfg.seed + static_cast<std::uint64_t>(i));
    } catch (const std::exception& e) {
#pragma omp critical(exitctl_sampler_failure)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw std::runtime_error(failure);
  finalize(b);
  return b;
}

BatchStats sample_batch_serial(const ProblemSpec& spec, const Controller& controller, const SimConfig& cfg,
                               std::size_t n) {
  BatchStats b = prepare(spec, controller, cfg, n);
  for (std::size_t i = 0; i < n; ++i) b.paths[i] = simulate_trajectory(spec, controller, cfg, cfg.seed + i);
  finalize(b);
  return b;
}

void write_trajectories_csv(const BatchStats& batch, std::size_t dimension, const std::filesystem::path& path) {
  CsvWriter w(path);
  std::vector<std::string> cols{"seed", "tau", "W", "M_u", "QV_u", "exited"};
  for (std::size_t k = 0; k < dimension; ++k) cols.push_back("exit_" + std::to_string(k + 1));
  w.header(cols);
  for (std::size_t i = 0; i < batch.paths.size(); ++i) {
    const auto& p = batch.paths[i];
    w << (batch.seed_base + i) << p.tau << p.W << p.M_u << p.QV_u << std::uint64_t{p.exited ? 1u : 0u};
    for (std::size_t k = 0; k < dimension; ++k) w << (k < p.exit_point.size() ? p.exit_point[k] : 0.0);
    w.end_row();
  }
}

}  // namespace exitctl
