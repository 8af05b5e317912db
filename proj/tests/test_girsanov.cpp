#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitctl/acceptance.hpp"
#include "exitctl/girsanov.hpp"

#include <cmath>

using namespace exitctl;

TEST_CASE("exponential martingale weight") {
  const auto w0 = exp_martingale_weight(0.0, 0.0);
  CHECK(w0.weight == 1.0);
  CHECK(w0.log_weight == 0.0);
  const auto w = exp_martingale_weight(1.0, 2.0);
  CHECK(w.log_weight == doctest::Approx(0.0));
  CHECK(w.weight == doctest::Approx(1.0));
  const auto tiny = exp_martingale_weight(-2000.0, 10.0);
  CHECK(tiny.underflow);
  CHECK(tiny.weight == 0.0);
  CHECK(std::isfinite(tiny.log_weight));
  CHECK_THROWS_AS(exp_martingale_weight(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("K estimator arithmetic") {
  PathStats p;
  p.exited = true;
  p.W = 2.0;
  p.QV_u = 0.5;
  p.M_u = -0.3;
  CHECK(k_estimator(p, 1.0, 0).value == doctest::Approx(2.25));
  CHECK(k_estimator(p, 2.0, 1).value == doctest::Approx(2.0 + 0.125 - 0.15));
  CHECK_THROWS_AS(k_estimator(p, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(k_estimator(p, 0.0, 0), std::invalid_argument);
  p.exited = false;
  CHECK_THROWS_AS(k_estimator(p, 1.0, 0), std::invalid_argument);
}

TEST_CASE("kazamaki bound") {
  const auto k = kazamaki_bound(0.1, 1.0, 4.0);
  CHECK(k.bound == doctest::Approx(0.5));
  CHECK(k.satisfied);
  CHECK_FALSE(kazamaki_bound(1.0, 1.0, 4.0).satisfied);
  CHECK_THROWS_AS(kazamaki_bound(0.1, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("reweighting a tilted batch recovers the untilted mean") {
  const auto spec = benchmark_b1();
  SimConfig c;
  c.dt = 1e-3;
  c.seed = 101;
  const FieldController free(1, nullptr);
  auto tilt = std::make_shared<LinearVectorField>(2.0, Point{0.5});
  const FieldController tilted(1, tilt);
  const auto base = sample_batch(spec, free, c, 8000);
  c.seed = 202;
  const auto other = sample_batch(spec, tilted, c, 8000);
  auto tau = [](const PathStats& p) { return p.tau; };
  const auto direct = summarize(base.collect(tau));
  const auto rw = reweighted_expectation(other, tau);
  CHECK(std::abs(direct.mean - rw.mean) <= 3.0 * combined_se(direct, rw));
  CHECK(rw.effective_sample_size > 0.5 * 8000);
  CHECK(rw.n_underflow == 0);
}

TEST_CASE("reweighting by a recorded probe") {
  const auto spec = benchmark_b1();
  SimConfig c;
  c.dt = 1e-3;
  auto probe = std::make_shared<ConstantVectorField>(Point{0.0});
  const FieldController ctl(1, nullptr, {probe});
  const auto b = sample_batch(spec, ctl, c, 200);
  auto tau = [](const PathStats& p) { return p.tau; };
  // zero probe: unit weights
  const auto rw = reweighted_expectation(b, tau, ReweightSource::probe_field(0));
  CHECK(rw.mean == doctest::Approx(b.tau.mean).epsilon(1e-12));
  CHECK(rw.effective_sample_size == doctest::Approx(200.0));
  CHECK_THROWS_AS(reweighted_expectation(b, tau, ReweightSource::probe_field(3)), std::out_of_range);
}
