// Serial vs OpenMP trajectory sampling on the double-well benchmark.
// usage: bench_sampler [n_traj] [max_threads]
#include "exitctl/acceptance.hpp"
#include "exitctl/pde_oracle.hpp"
#include "exitctl/sampler.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

using namespace exitctl;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same(const BatchStats& a, const BatchStats& b) {
  if (a.paths.size() != b.paths.size()) return false;
  for (std::size_t i = 0; i < a.paths.size(); ++i)
    if (a.paths[i].W != b.paths[i].W || a.paths[i].M_u != b.paths[i].M_u || a.paths[i].QV_probe != b.paths[i].QV_probe)
      return false;
  return a.W.mean == b.W.mean && a.W.variance == b.W.variance;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20000;
  const int max_threads = argc > 2 ? std::atoi(argv[2]) : omp_get_num_procs();

  const ProblemSpec spec = benchmark_b2();
  const BasisPtr basis = benchmark_b2_basis();
  const auto a = project_control(solve_feynman_kac(spec, make_grid(*spec.domain, 1e-3)), *basis).a;
  const BasisController ctrl(basis, a, true);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.seed = 7;

  auto t0 = std::chrono::steady_clock::now();
  const BatchStats ref = sample_batch_serial(spec, ctrl, cfg, n);
  const double serial = seconds_since(t0);
  std::size_t steps = 0;
  for (const auto& p : ref.paths) steps += p.n_steps;
  std::printf("paths %zu, steps %zu, %d processors\n", n, steps, omp_get_num_procs());
  std::printf("%-10s %10s %12s %8s %s\n", "mode", "seconds", "ns/step", "speedup", "identical");
  std::printf("%-10s %10.3f %12.1f %8.2f %s\n", "serial", serial, 1e9 * serial / steps, 1.0, "-");

  for (int t = 1; t <= max_threads; t *= 2) {
    omp_set_num_threads(t);
    t0 = std::chrono::steady_clock::now();
    const BatchStats b = sample_batch(spec, ctrl, cfg, n);
    const double s = seconds_since(t0);
    char label[32];
    std::snprintf(label, sizeof label, "omp x%d", t);
    std::printf("%-10s %10.3f %12.1f %8.2f %s\n", label, s, 1e9 * s / steps, serial / s, same(ref, b) ? "yes" : "NO");
  }
  return 0;
}
