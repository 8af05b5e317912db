#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitctl/acceptance.hpp"
#include "exitctl/descent.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace exitctl;

namespace {

BasisPtr linear_basis() {
  return std::make_shared<BasisSet>(1, std::vector<BasisFunctionPtr>{std::make_shared<Monomial>(1, 0, 1)});
}

SimConfig sim(double dt) {
  SimConfig c;
  c.dt = dt;
  return c;
}

DescentConfig b2_descent(std::size_t n_iter, double h) {
  DescentConfig d;
  d.a0.a.assign(8, 0.0);
  d.n_iter = n_iter;
  d.n_traj = 300;
  d.step.h = h;
  d.grad_tol = 0.0;
  d.seed = 17;
  d.form = FirstVariationForm::centered;
  return d;
}

// Constant drift a on the unit interval, started well away from the optimum near 0.
DescentConfig b1_descent(std::size_t n_iter, double h) {
  DescentConfig d;
  d.a0.a = {3.0};
  d.n_iter = n_iter;
  d.n_traj = 2000;
  d.step.h = h;
  d.grad_tol = 0.0;
  d.seed = 23;
  return d;
}

}  // namespace

TEST_CASE("convexity preconditions follow the terminal cost") {
  const auto boundary = benchmark_b1().domain->boundary_samples(5);
  const auto ok = check_convexity_preconditions(benchmark_b1(1.5), boundary);
  CHECK(ok.gamma == doctest::Approx(0.5));
  CHECK(ok.satisfied);
  CHECK(ok.suggested_shift == 0.0);
  const auto bad = check_convexity_preconditions(benchmark_b1(0.5), boundary);
  CHECK(bad.gamma == doctest::Approx(-0.5));
  CHECK_FALSE(bad.satisfied);
  CHECK(bad.suggested_shift == doctest::Approx(0.5));
}

TEST_CASE("descent refuses a nonconvex problem unless allowed") {
  DescentConfig d;
  d.a0.a = {0.0};
  d.n_iter = 1;
  d.n_traj = 50;
  CHECK_THROWS_AS(run_descent(benchmark_b1(0.5), linear_basis(), d, sim(1e-3)), std::invalid_argument);
  d.allow_nonconvex = true;
  const auto t = run_descent(benchmark_b1(0.5), linear_basis(), d, sim(1e-3));
  CHECK_FALSE(t.warnings.empty());
}

TEST_CASE("coercivity constant for a constant probe") {
  // <M^phi>_tau = tau / (2 eps) = tau, so the constant is E tau = 1/4
  const auto c = estimate_coercivity_constant(benchmark_b1(), linear_basis(), {ControlVector{{0.0}}}, sim(1e-4), 5000);
  CHECK(std::abs(c.value - 0.25) <= 4.0 * c.std_error + 1e-3);
}

TEST_CASE("zero iterations record the starting point only") {
  auto d = b2_descent(0, 0.01);
  const auto t = run_descent(benchmark_b2(), benchmark_b2_basis(), d, sim(2e-3));
  REQUIRE(t.records.size() == 1);
  CHECK(t.records[0].a == d.a0.a);
  CHECK(t.records[0].step == 0.0);
  CHECK((t.status == "max_iter" || t.status == "converged"));
}

TEST_CASE("loose tolerance stops at once") {
  auto d = b2_descent(10, 0.01);
  d.grad_tol = 1e6;
  const auto t = run_descent(benchmark_b2(), benchmark_b2_basis(), d, sim(2e-3));
  CHECK(t.records.size() == 1);
  CHECK(t.status == "converged");
}

TEST_CASE("stopping rule waits for min_iter") {
  auto d = b2_descent(4, 0.01);
  d.grad_tol = 1e6;
  d.min_iter = 2;
  const auto t = run_descent(benchmark_b2(), benchmark_b2_basis(), d, sim(2e-3));
  CHECK(t.records.size() == 3);
  CHECK(t.status == "converged");
}

TEST_CASE("frozen backtracking never increases the sampled functional") {
  auto d = b1_descent(6, 5.0);
  d.seed_policy = SeedPolicy::frozen;
  d.step.kind = StepSchedule::Kind::backtracking;
  const auto t = run_descent(benchmark_b1(), linear_basis(), d, sim(1e-3));
  REQUIRE(t.records.size() >= 2);
  for (std::size_t l = 1; l < t.records.size(); ++l) CHECK(t.records[l].phi_hat <= t.records[l - 1].phi_hat);
  for (const auto& r : t.records) CHECK(r.step <= 5.0);
}

TEST_CASE("fresh seeds differ per iteration, frozen seeds do not") {
  DescentConfig d;
  d.seed = 9;
  CHECK(iteration_seed(d, 0) != iteration_seed(d, 1));
  d.seed_policy = SeedPolicy::frozen;
  CHECK(iteration_seed(d, 0) == iteration_seed(d, 1));
}

TEST_CASE("resuming from a checkpoint reproduces the uninterrupted run") {
  const auto spec = benchmark_b1();
  const auto basis = linear_basis();
  auto d = b1_descent(6, 0.5);
  d.averaging_start = 2;
  const auto full = run_descent(spec, basis, d, sim(1e-3));
  REQUIRE(full.records.size() == 7);

  auto first = d;
  first.n_iter = 3;
  const auto part = run_descent(spec, basis, first, sim(1e-3));
  const auto ckpt = std::filesystem::temp_directory_path() / "exitctl_descent_ckpt.json";
  write_checkpoint(part, first, ckpt);
  auto second = resume_from_checkpoint(first, ckpt);
  second.n_iter = 3;
  const auto rest = run_descent(spec, basis, second, sim(1e-3));
  std::filesystem::remove(ckpt);

  REQUIRE(rest.records.size() == 4);
  CHECK(rest.records.front().iter == 3);
  CHECK(rest.records.back().a == full.records.back().a);
  CHECK(rest.records.back().phi_hat == full.records.back().phi_hat);
  REQUIRE(full.averaged().has_value());
  REQUIRE(rest.averaged().has_value());
  CHECK(rest.averaged()->a == full.averaged()->a);
}

TEST_CASE("oversized steps trip the divergence guard") {
  // Thin strip: drift along x hardly changes the exit time, so phi grows like a^2
  // and any step beyond 2 / phi'' overshoots further each iteration.
  auto spec = benchmark_b1();
  spec.dimension = 2;
  spec.domain = std::make_shared<BoxDomain>(Point{-5.0, 0.0}, Point{5.0, 0.2});
  spec.potential = std::make_shared<ZeroPotential>(2);
  spec.start = {0.0, 0.1};
  auto basis = std::make_shared<BasisSet>(2, std::vector<BasisFunctionPtr>{std::make_shared<Monomial>(2, 0, 1)});
  DescentConfig d;
  d.a0.a = {1.0};
  d.n_iter = 30;
  d.n_traj = 4000;
  d.step.h = 300.0;
  d.grad_tol = 0.0;
  d.seed = 17;
  const auto t = run_descent(spec, basis, d, sim(1e-4));
  CHECK(t.status == "diverged");
  CHECK(t.records.size() == 6);
  CHECK_FALSE(t.diagnostic.empty());
}

TEST_CASE("a short descent lowers the functional") {
  auto d = b2_descent(15, 0.02);
  d.n_traj = 1000;
  const auto t = run_descent(benchmark_b2(), benchmark_b2_basis(), d, sim(2e-3));
  const auto &a = t.records.front(), &b = t.records.back();
  CHECK(b.phi_hat < a.phi_hat - 3.0 * std::hypot(a.phi_se, b.phi_se));
  CHECK(b.grad_norm < a.grad_norm);
}

namespace {

DescentTrace synthetic_trace(double rate, bool stationary) {
  DescentTrace t;
  for (int l = 0; l < 8; ++l) {
    DescentRecord r;
    r.iter = l;
    r.step = 0.1;
    const double off = stationary ? 0.0 : std::exp(-0.5 * rate * 0.1 * l);
    r.a = {1.0 + off, 2.0};
    t.records.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("convergence diagnostics") {
  const ControlVector a_inf{{1.0, 2.0}};
  const auto trivial = convergence_diagnostics(synthetic_trace(1.0, true), 0.5, 1.0, a_inf);
  CHECK(trivial.trivial);
  CHECK(trivial.pass);

  // |a - a_inf|^2 = exp(-rate t)
  const auto fit = convergence_diagnostics(synthetic_trace(2.0, false), 0.5, 2.0, a_inf);
  CHECK_FALSE(fit.trivial);
  CHECK(fit.fitted_rate == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fit.bound == doctest::Approx(1.0));
  CHECK(fit.pass);
  CHECK_FALSE(convergence_diagnostics(synthetic_trace(2.0, false), 0.5, 200.0, a_inf).pass);

  auto short_trace = synthetic_trace(1.0, false);
  short_trace.records.resize(2);
  CHECK_THROWS_AS(convergence_diagnostics(short_trace, 0.5, 1.0, a_inf), std::invalid_argument);
}

TEST_CASE("trace csv") {
  auto d = b2_descent(1, 0.01);
  const auto t = run_descent(benchmark_b2(), benchmark_b2_basis(), d, sim(2e-3));
  const auto path = std::filesystem::temp_directory_path() / "exitctl_trace_test.csv";
  write_trace_csv(t, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,a_1,a_2,a_3,a_4,a_5,a_6,a_7,a_8,phi_hat,phi_se,grad_norm,step");
  std::filesystem::remove(path);
}
