#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitctl/acceptance.hpp"
#include "exitctl/girsanov.hpp"
#include "exitctl/variation.hpp"

#include <cmath>

using namespace exitctl;

namespace {

// u^a = a on the unit interval: b(x) = x.
BasisPtr linear_basis() { return std::make_shared<BasisSet>(1, std::vector<BasisFunctionPtr>{std::make_shared<Monomial>(1, 0, 1)}); }

SimConfig sim(double dt, std::uint64_t seed) {
  SimConfig c;
  c.dt = dt;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("functional at zero control is the mean cost") {
  const auto b = sample_batch(benchmark_b1(), FieldController(1, nullptr), sim(1e-3, 4), 500);
  const auto phi = estimate_functional(b, 1.0);
  CHECK(phi.mean == doctest::Approx(b.W.mean).epsilon(1e-14));
  CHECK(phi.n_samples == 500);
}

TEST_CASE("analytic gradient matches central differences on a constant drift") {
  const auto spec = benchmark_b1();
  const auto basis = linear_basis();
  const ControlVector a{{0.3}};
  const auto cfg = sim(1e-3, 77);
  const std::size_t n = 20000;
  const auto b = sample_batch(spec, BasisController(basis, a, true), cfg, n);
  const auto fd = fd_gradient_oracle(spec, basis, a, 1.0, 0.05, cfg, n);
  for (auto form : {FirstVariationForm::compact, FirstVariationForm::h_form, FirstVariationForm::centered}) {
    const auto g = estimate_first_variation(b, 1.0, 0, form);
    CHECK(std::abs(g.mean - fd.value[0]) <= 4.0 * std::hypot(g.std_error, fd.se[0]));
  }
}

TEST_CASE("compact and h forms agree in mean") {
  const auto spec = benchmark_b2();
  const auto basis = benchmark_b2_basis();
  ControlVector a{std::vector<double>(basis->size(), -1.0)};
  const auto b = sample_batch(spec, BasisController(basis, a, true), sim(2e-3, 5), 3000);
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const auto g = estimate_first_variation(b, spec.sigma, i);
    CHECK(g.discrepancy <= 4.0 * g.discrepancy_se + 1e-12);
  }
}

TEST_CASE("gradient and hessian bookkeeping") {
  const auto spec = benchmark_b2();
  const auto basis = benchmark_b2_basis();
  ControlVector a{std::vector<double>(basis->size(), 0.5)};
  const auto b = sample_batch(spec, BasisController(basis, a, true), sim(2e-3, 6), 400);
  const auto gh = estimate_gradient_hessian(b, spec.sigma, FirstVariationForm::centered);
  const std::size_t n = basis->size();
  REQUIRE(gh.n == n);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(gh.grad[i] == estimate_first_variation(b, spec.sigma, i, FirstVariationForm::centered).mean);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(gh.h(i, j) == gh.h(j, i));
      CHECK(second_variation_sample(b.paths[0], spec.sigma, i, j) ==
            second_variation_sample(b.paths[0], spec.sigma, j, i));
    }
  }
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::sin(1.0 + i);
  double zhz = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) zhz += z[i] * z[j] * gh.h(i, j);
  const auto q = estimate_quadratic_form(b, spec.sigma, z);
  CHECK(q.mean == doctest::Approx(zhz).epsilon(1e-10));
  const double gamma = 0.2;
  const auto margin = estimate_coercivity_margin(b, spec.sigma, z, gamma);
  const auto qv = estimate_combined_qv(b, z);
  CHECK(margin.mean == doctest::Approx(q.mean - gamma * qv.mean).epsilon(1e-10));
  CHECK(qv.mean >= 0.0);
}

TEST_CASE("probe index out of range") {
  const auto b = sample_batch(benchmark_b1(), BasisController(linear_basis(), ControlVector{{0.0}}, true), sim(1e-3, 1), 20);
  CHECK_THROWS(estimate_first_variation(b, 1.0, 1));
}
