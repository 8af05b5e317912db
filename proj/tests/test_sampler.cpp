#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitctl/acceptance.hpp"
#include "exitctl/sampler.hpp"

#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace exitctl;

namespace {

SimConfig sim(double dt, std::uint64_t seed = 11) {
  SimConfig c;
  c.dt = dt;
  c.seed = seed;
  return c;
}

const FieldController kFree(1, nullptr);

bool same_paths(const BatchStats& a, const BatchStats& b) {
  if (a.paths.size() != b.paths.size()) return false;
  for (std::size_t i = 0; i < a.paths.size(); ++i) {
    const auto &p = a.paths[i], &q = b.paths[i];
    if (p.tau != q.tau || p.W != q.W || p.M_u != q.M_u || p.QV_u != q.QV_u || p.exit_point != q.exit_point ||
        p.M_probe != q.M_probe || p.QV_probe != q.QV_probe || p.CV_u_probe != q.CV_u_probe)
      return false;
  }
  return a.tau.mean == b.tau.mean && a.W.variance == b.W.variance;
}

}  // namespace

TEST_CASE("mean exit time of free diffusion from the midpoint") {
  const auto spec = benchmark_b1();
  const auto b = sample_batch(spec, kFree, sim(1e-4), 10000);
  CHECK(b.n_exited == 10000);
  CHECK(std::abs(b.tau.mean - 0.25) <= 4.0 * b.tau.std_error + 1e-3);
  // W = tau + kappa_t
  CHECK(b.W.mean == doctest::Approx(b.tau.mean + 1.5).epsilon(1e-12));
}

TEST_CASE("laplace transform of the exit time") {
  const auto spec = benchmark_b1();
  const auto b = sample_batch(spec, kFree, sim(1e-4, 5), 10000);
  const auto v = summarize(b.collect([](const PathStats& p) { return std::exp(-p.tau); }));
  const double exact = 1.0 / std::cosh(0.5 / std::sqrt(0.5));
  CHECK(exact == doctest::Approx(0.7933).epsilon(1e-4));
  CHECK(std::abs(v.mean - exact) <= 4.0 * v.std_error + 1e-3);
}

TEST_CASE("single trajectory batch") {
  const auto b = sample_batch(benchmark_b1(), kFree, sim(1e-3), 1);
  CHECK(b.paths.size() == 1);
  CHECK(b.tau.n_samples == 1);
  CHECK(b.tau.std_error == 0.0);
  const auto solo = simulate_trajectory(benchmark_b1(), kFree, sim(1e-3), b.seed_base);
  CHECK(solo.tau == b.paths[0].tau);
}

TEST_CASE("batch output is independent of the thread count") {
  const auto spec = benchmark_b2();
  const auto basis = benchmark_b2_basis();
  ControlVector a{std::vector<double>(basis->size(), -0.5)};
  const BasisController ctl(basis, a, true);
  const int before = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = sample_batch(spec, ctl, sim(2e-3), 300);
  omp_set_num_threads(3);
  const auto three = sample_batch(spec, ctl, sim(2e-3), 300);
  omp_set_num_threads(before);
  const auto serial = sample_batch_serial(spec, ctl, sim(2e-3), 300);
  CHECK(same_paths(one, three));
  CHECK(same_paths(one, serial));
}

TEST_CASE("seeds change the sample, reruns do not") {
  const auto a = sample_batch(benchmark_b1(), kFree, sim(1e-3, 1), 50);
  const auto b = sample_batch(benchmark_b1(), kFree, sim(1e-3, 1), 50);
  const auto c = sample_batch(benchmark_b1(), kFree, sim(1e-3, 2), 50);
  CHECK(same_paths(a, b));
  CHECK_FALSE(same_paths(a, c));
}

TEST_CASE("step cap without any exit is an error") {
  auto c = sim(1e-3);
  c.max_steps = 1;
  CHECK_THROWS_AS(sample_batch(benchmark_b1(), kFree, c, 20), std::runtime_error);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(sample_batch(benchmark_b1(), kFree, sim(1e-3), 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_batch(benchmark_b1(), kFree, sim(-1.0), 5), std::invalid_argument);
  auto off = benchmark_b1();
  off.start = {1.5};
  CHECK_THROWS_AS(sample_batch(off, kFree, sim(1e-3), 5), std::invalid_argument);
}

TEST_CASE("stochastic integral identities") {
  const auto spec = benchmark_b1();
  auto u = std::make_shared<ConstantVectorField>(Point{0.8});
  auto probe = std::make_shared<LinearVectorField>(2.0, Point{0.5});
  const FieldController ctl(1, u, {probe});
  const auto b = sample_batch(spec, ctl, sim(1e-4, 3), 10000);
  // optional stopping
  CHECK(std::abs(b.M_u.mean) <= 4.0 * b.M_u.std_error);
  const auto mp = summarize(b.collect([](const PathStats& p) { return p.M_probe[0]; }));
  CHECK(std::abs(mp.mean) <= 4.0 * mp.std_error);
  // Ito isometry
  const auto diff = summarize(b.collect([](const PathStats& p) { return p.M_u * p.M_u - p.QV_u; }));
  CHECK(std::abs(diff.mean) <= 4.0 * diff.std_error);
  for (const auto& p : b.paths) {
    // constant control: QV_u = |u|^2 tau exactly
    CHECK(p.QV_u == doctest::Approx(0.64 * p.tau).epsilon(1e-9));
    CHECK(p.QV_probe[0] >= 0.0);
    CHECK(p.CV_u_probe[0] * p.CV_u_probe[0] <= p.QV_u * p.QV_probe[0] * (1 + 1e-12) + 1e-300);
  }
}

TEST_CASE("probe quadratic variation is positive semidefinite") {
  const auto spec = benchmark_b2();
  const auto basis = benchmark_b2_basis();
  const BasisController ctl(basis, ControlVector{std::vector<double>(basis->size(), 0.0)}, true);
  const auto b = sample_batch(spec, ctl, sim(2e-3, 9), 50);
  const std::size_t m = basis->size();
  for (const auto& p : b.paths) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        CHECK(p.qv_probe(i, j) == p.qv_probe(j, i));
        CHECK(p.qv_probe(i, j) * p.qv_probe(i, j) <= p.qv_probe(i, i) * p.qv_probe(j, j) * (1 + 1e-12) + 1e-300);
      }
  }
}

TEST_CASE("trajectory csv header") {
  const auto b = sample_batch(benchmark_b1(), kFree, sim(1e-3), 5);
  const auto path = std::filesystem::temp_directory_path() / "exitctl_traj_test.csv";
  write_trajectories_csv(b, 1, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "seed,tau,W,M_u,QV_u,exited,exit_1");
  int rows = 0;
  for (std::string l; std::getline(in, l);) ++rows;
  CHECK(rows == 5);
  std::filesystem::remove(path);
}
