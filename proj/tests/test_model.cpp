#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitctl/model.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace exitctl;

namespace {

ProblemSpec unit_interval(double kappa_r = 1.0, double kappa_t = 0.0) {
  ProblemSpec s;
  s.dimension = 1;
  s.epsilon = 0.5;
  s.sigma = 1.0;
  s.start = {0.5};
  s.potential = std::make_shared<ZeroPotential>(1);
  s.domain = std::make_shared<BoxDomain>(Point{0.0}, Point{1.0});
  s.running_cost = std::make_shared<ConstantScalarField>(kappa_r);
  s.terminal_cost = std::make_shared<ConstantScalarField>(kappa_t);
  return s;
}

}  // namespace

TEST_CASE("zero potential on the unit interval validates") {
  const auto rep = validate_problem(unit_interval());
  CHECK(rep.ok());
  for (const auto& c : rep.checks) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
}

TEST_CASE("negative running cost is rejected with a location") {
  const auto rep = validate_problem(unit_interval(-1.0));
  CHECK_FALSE(rep.ok());
  const auto* c = rep.find("running_cost_nonnegative");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->passed);
  CHECK(c->location.has_value());
}

TEST_CASE("parameter checks") {
  auto s = unit_interval();
  s.epsilon = 0.0;
  CHECK_FALSE(validate_problem(s).find("epsilon_positive")->passed);
  s = unit_interval();
  s.start = {1.2};
  CHECK_FALSE(validate_problem(s).find("start_interior")->passed);
}

TEST_CASE("declared growth constants are spot-checked") {
  auto s = unit_interval();
  auto q = std::make_shared<QuadraticPotential>(std::vector<double>{50.0}, Point{0.0});
  q->set_growth({0.01, 0.01});
  s.potential = q;
  CHECK_FALSE(validate_problem(s).find("growth_conditions")->passed);
  auto ok = std::make_shared<QuadraticPotential>(std::vector<double>{1.0}, Point{0.0});
  ok->set_growth({1.0, 2.0});
  s.potential = ok;
  CHECK(validate_problem(s).find("growth_conditions")->passed);
}

TEST_CASE("four gaussian bumps cover the interval with full rank") {
  const BoxDomain dom(Point{0.0}, Point{1.0});
  const auto basis = make_gaussian_basis(dom, {4});
  const auto rep = validate_basis(*basis, dom);
  CHECK(rep.find("basis_support_cover")->passed);
  CHECK(rep.find("basis_independent")->passed);
  CHECK(rep.find("basis_nonconstant")->passed);
  CHECK(rep.ok());
}

TEST_CASE("dependent or constant bases fail validation") {
  const BoxDomain dom(Point{0.0}, Point{1.0});
  auto g = std::make_shared<GaussianBump>(Point{0.5}, 0.3);
  CHECK_FALSE(validate_basis(BasisSet(1, {g, g}), dom).find("basis_independent")->passed);
  auto flat = std::make_shared<Monomial>(1, 0, 0);
  CHECK_FALSE(validate_basis(BasisSet(1, {flat}), dom).find("basis_nonconstant")->passed);
}

TEST_CASE("disjoint compact bumps pass the disjointness check") {
  const BoxDomain dom(Point{0.0}, Point{1.0});
  const auto basis = make_disjoint_basis(dom, {5});
  REQUIRE(basis->disjoint_supports());
  const auto rep = validate_basis(*basis, dom);
  CHECK(rep.find("basis_disjoint_supports")->passed);
  CHECK(rep.ok());
}

TEST_CASE("control field examples") {
  const BasisSet mono(1, {std::make_shared<Monomial>(1, 0, 1), std::make_shared<Monomial>(1, 0, 2)});
  const Point x{0.5};
  CHECK(control_field(mono, ControlVector{{1.0, 1.0}}, x)[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(control_field(mono, ControlVector{{0.0, 0.0}}, x)[0] == 0.0);

  const BoxDomain dom(Point{0.0}, Point{1.0});
  const auto basis = make_gaussian_basis(dom, {4});
  Point g(1);
  (*basis)[0].gradient(x, g);
  CHECK(control_field(*basis, ControlVector{{1.0, 0.0, 0.0, 0.0}}, x)[0] == g[0]);
  CHECK_THROWS_AS(control_field(*basis, ControlVector{{1.0}}, x), std::invalid_argument);
}

TEST_CASE("control field is linear in the coefficients") {
  const BoxDomain dom(Point{-1.0}, Point{1.0});
  const auto basis = make_gaussian_basis(dom, {6});
  const ControlVector a{{0.3, -1.2, 2.0, 0.1, -0.7, 1.5}}, c{{1.0, 0.5, -0.25, 2.0, 0.0, -1.0}};
  const double lambda = 0.37;
  ControlVector mix = a;
  for (std::size_t i = 0; i < 6; ++i) mix.a[i] += lambda * c.a[i];
  for (double xv = -0.95; xv < 1.0; xv += 0.1) {
    const Point x{xv};
    const double lhs = control_field(*basis, mix, x)[0];
    const double rhs = control_field(*basis, a, x)[0] + lambda * control_field(*basis, c, x)[0];
    CHECK(std::abs(lhs - rhs) <= 1e-14 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("cost evaluation") {
  auto s = unit_interval(1.0, 2.0);
  CHECK(eval_costs(s, Point{0.3}, false) == 1.0);
  CHECK(eval_costs(s, Point{1.0}, true) == 2.0);
  s.terminal_cost = std::make_shared<PolynomialScalarField>(0.0, std::vector<double>{0.0}, std::vector<double>{1.0});
  CHECK(eval_costs(s, Point{1.0}, true) == 1.0);
  CHECK_THROWS_AS(eval_costs(s, Point{2.0}, false), std::out_of_range);
}

TEST_CASE("box and ball geometry") {
  const BoxDomain box(Point{0.0, 0.0}, Point{1.0, 2.0});
  CHECK(box.contains(Point{0.5, 1.0}));
  CHECK_FALSE(box.contains(Point{1.5, 1.0}));
  const Point y = box.segment_exit_point(Point{0.5, 1.0}, Point{1.5, 1.0});
  CHECK(box.boundary_distance(y) <= box.tolerance());
  CHECK(y[0] == doctest::Approx(1.0));

  const BallDomain ball(Point{0.0, 0.0}, 1.0);
  CHECK(ball.contains(Point{0.3, 0.3}));
  CHECK_FALSE(ball.contains(Point{0.8, 0.8}));
  const Point z = ball.segment_exit_point(Point{0.0, 0.0}, Point{2.0, 0.0});
  CHECK(ball.boundary_distance(z) <= ball.tolerance());
  const Point p = ball.nearest_boundary_point(Point{0.1, 0.0});
  CHECK(p[0] == doctest::Approx(1.0));
}

TEST_CASE("tabulated potential interpolates the table") {
  const auto path = std::filesystem::temp_directory_path() / "exitctl_grid_potential.csv";
  {
    std::ofstream f(path);
    f << "x,V,dV\n";
    for (int i = 0; i <= 100; ++i) {
      const double x = -1.0 + 0.02 * i;
      f << x << "," << x * x << "," << 2 * x << "\n";
    }
  }
  const auto pot = GridPotential::from_csv(path, 1);
  CHECK(pot->value(Point{0.5}) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(pot->value(Point{0.51}) == doctest::Approx(0.5 * (0.25 + 0.2704)).epsilon(1e-12));
  Point g(1);
  pot->gradient(Point{0.3}, g);
  CHECK(g[0] == doctest::Approx(0.6).epsilon(1e-12));
  std::filesystem::remove(path);
}

TEST_CASE("validation is deterministic") {
  const auto s = unit_interval();
  const BoxDomain dom(Point{0.0}, Point{1.0});
  const auto basis = make_gaussian_basis(dom, {4});
  CHECK(validate_problem(s, basis.get()).summary() == validate_problem(s, basis.get()).summary());
}
