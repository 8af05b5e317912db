#pragma once

#include "exitctl/fields.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace exitctl {

// ---------------------------------------------------------------------------
// Potentials

struct GrowthConstants {
  double k0 = 0.0;
  double k1 = 0.0;
};

class Potential {
 public:
  virtual ~Potential() = default;
  virtual std::string kind() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;

  const std::optional<GrowthConstants>& growth() const { return growth_; }
  void set_growth(GrowthConstants g) { growth_ = g; }

 private:
  std::optional<GrowthConstants> growth_;
};

using PotentialPtr = std::shared_ptr<const Potential>;

class ZeroPotential final : public Potential {
 public:
  explicit ZeroPotential(std::size_t d) : d_(d) {}
  std::string kind() const override { return "zero"; }
  std::size_t dimension() const override { return d_; }
  double value(std::span<const double>) const override { return 0.0; }
  void gradient(std::span<const double>, std::span<double> out) const override;

 private:
  std::size_t d_;
};

// V(x) = 1/2 sum_k stiffness_k (x_k - center_k)^2
class QuadraticPotential final : public Potential {
 public:
  QuadraticPotential(std::vector<double> stiffness, Point center);
  std::string kind() const override { return "quadratic"; }
  std::size_t dimension() const override { return center_.size(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;

 private:
  std::vector<double> stiffness_;
  Point center_;
};

// V(x) = height * (x^2 - a^2)^2 on the real line.
class DoubleWellPotential final : public Potential {
 public:
  explicit DoubleWellPotential(double height = 1.0, double a = 1.0) : height_(height), a_(a) {}
  std::string kind() const override { return "double_well_1d"; }
  std::size_t dimension() const override { return 1; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;

 private:
  double height_;
  double a_;
};

// Multilinear interpolation of tabulated V and grad V on a tensor-product grid.
// Points outside the table are clamped to its hull.
class GridPotential final : public Potential {
 public:
  GridPotential(std::vector<std::vector<double>> axes, std::vector<double> values,
                std::vector<double> gradients);
  // CSV columns: x_1..x_d, V, dV_1..dV_d (header row optional).
  static std::shared_ptr<GridPotential> from_csv(const std::filesystem::path& path, std::size_t d);

  std::string kind() const override { return "grid"; }
  std::size_t dimension() const override { return axes_.size(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;

 private:
  template <typename Fn>
  void interpolate(std::span<const double> x, Fn&& visit) const;

  std::vector<std::vector<double>> axes_;
  std::vector<std::size_t> strides_;
  std::vector<double> values_;
  std::vector<double> gradients_;  // node-major, d entries per node
};

// ---------------------------------------------------------------------------
// Domains

class Domain {
 public:
  virtual ~Domain() = default;
  virtual std::string shape() const = 0;
  virtual std::size_t dimension() const = 0;
  // Open-set membership.
  virtual bool contains(std::span<const double> x) const = 0;
  // Unsigned distance to the boundary.
  virtual double boundary_distance(std::span<const double> x) const = 0;
  // Boundary point on the segment from an interior point to an exterior one.
  virtual Point segment_exit_point(std::span<const double> inside, std::span<const double> outside) const = 0;
  virtual Point nearest_boundary_point(std::span<const double> x) const = 0;
  // Probability that a Brownian bridge between two interior points with
  // per-axis variance `variance` touches the boundary (half-space
  // approximation per face), together with the boundary point used as exit
  // location when it does.
  virtual double bridge_exit_probability(std::span<const double> x0, std::span<const double> x1,
                                         double variance, Point& exit_point) const = 0;
  virtual Point lower() const = 0;
  virtual Point upper() const = 0;
  // Deterministic boundary samples; `per_axis` controls density on faces.
  virtual std::vector<Point> boundary_samples(std::size_t per_axis) const = 0;

  double tolerance() const { return tol_; }
  void set_tolerance(double tol) { tol_ = tol; }
  bool in_bounding_box(std::span<const double> x) const;
  bool in_closure(std::span<const double> x) const;

 private:
  double tol_ = 1e-9;
};

using DomainPtr = std::shared_ptr<const Domain>;

// Axis-aligned box; an interval when d == 1.
class BoxDomain final : public Domain {
 public:
  BoxDomain(Point lower, Point upper);
  std::string shape() const override { return lower_.size() == 1 ? "interval" : "box"; }
  std::size_t dimension() const override { return lower_.size(); }
  bool contains(std::span<const double> x) const override;
  double boundary_distance(std::span<const double> x) const override;
  Point segment_exit_point(std::span<const double> inside, std::span<const double> outside) const override;
  Point nearest_boundary_point(std::span<const double> x) const override;
  double bridge_exit_probability(std::span<const double> x0, std::span<const double> x1, double variance,
                                 Point& exit_point) const override;
  Point lower() const override { return lower_; }
  Point upper() const override { return upper_; }
  std::vector<Point> boundary_samples(std::size_t per_axis) const override;

 private:
  Point lower_;
  Point upper_;
};

class BallDomain final : public Domain {
 public:
  BallDomain(Point center, double radius);
  std::string shape() const override { return "ball"; }
  std::size_t dimension() const override { return center_.size(); }
  bool contains(std::span<const double> x) const override;
  double boundary_distance(std::span<const double> x) const override;
  Point segment_exit_point(std::span<const double> inside, std::span<const double> outside) const override;
  Point nearest_boundary_point(std::span<const double> x) const override;
  double bridge_exit_probability(std::span<const double> x0, std::span<const double> x1, double variance,
                                 Point& exit_point) const override;
  Point lower() const override;
  Point upper() const override;
  std::vector<Point> boundary_samples(std::size_t per_axis) const override;
  const Point& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  Point center_;
  double radius_;
};

// ---------------------------------------------------------------------------
// Basis functions b_i and their supports S_i

struct Support {
  enum class Kind { everywhere, ball, box };
  Kind kind = Kind::everywhere;
  Point center;      // ball
  double radius = 0; // ball
  Point lower;       // box
  Point upper;       // box

  bool contains(std::span<const double> x) const;
  // Strict interior membership, used for overlap checks.
  bool interior_contains(std::span<const double> x) const;
};

class BasisFunction {
 public:
  virtual ~BasisFunction() = default;
  virtual std::string kind() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
  virtual Support support() const = 0;
};

using BasisFunctionPtr = std::shared_ptr<const BasisFunction>;

// exp(-|x - c|^2 / (2 w^2)); support truncated where the value drops below 1e-12.
class GaussianBump final : public BasisFunction {
 public:
  GaussianBump(Point center, double width);
  std::string kind() const override { return "gaussian"; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  Support support() const override;

  static constexpr double kSupportThreshold = 1e-12;

 private:
  Point center_;
  double inv_w2_;
  double width_;
};

// Uniform cubic B-spline on the line, centred at `center` with knot spacing h.
class CubicBSpline final : public BasisFunction {
 public:
  CubicBSpline(double center, double spacing) : center_(center), h_(spacing) {}
  std::string kind() const override { return "bspline"; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  Support support() const override;

 private:
  double center_;
  double h_;
};

// prod_k (1 - s_k^2)^3 with s_k = (x_k - c_k) / r_k on the box |s_k| < 1, zero
// outside; C^2 across the box faces.
class CompactBump final : public BasisFunction {
 public:
  CompactBump(Point center, Point half_widths);
  std::string kind() const override { return "compact"; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  Support support() const override;

 private:
  Point center_;
  Point half_;
};

// scale * x_axis^power.
class Monomial final : public BasisFunction {
 public:
  Monomial(std::size_t dimension, std::size_t axis, int power, double scale = 1.0);
  std::string kind() const override { return "monomial"; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  Support support() const override { return {}; }

 private:
  std::size_t d_;
  std::size_t axis_;
  int power_;
  double scale_;
};

class BasisSet {
 public:
  BasisSet(std::size_t dimension, std::vector<BasisFunctionPtr> functions, bool disjoint_supports = false);

  std::size_t size() const { return functions_.size(); }
  std::size_t dimension() const { return d_; }
  bool disjoint_supports() const { return disjoint_; }
  const BasisFunction& operator[](std::size_t i) const { return *functions_[i]; }

  // Row-major n x d matrix of gradients at x.
  void gradients(std::span<const double> x, std::span<double> out) const;
  double combination(std::span<const double> a, std::span<const double> x) const;

 private:
  std::size_t d_;
  std::vector<BasisFunctionPtr> functions_;
  bool disjoint_;
};

using BasisPtr = std::shared_ptr<const BasisSet>;

// Where Gaussian centres sit along each axis of the bounding box: `nodes` is
// linspace(lower, upper, count), `cells` the midpoints of count equal cells.
enum class CentreLayout { nodes, cells };

double centre_spacing(double lower, double upper, std::size_t count, CentreLayout layout);

// Gaussian bumps on a tensor grid of centres; width defaults to the centre
// spacing along the first axis.
BasisPtr make_gaussian_basis(const Domain& domain, std::vector<std::size_t> counts,
                             std::optional<double> width = std::nullopt, CentreLayout layout = CentreLayout::nodes);
BasisPtr make_bspline_basis(double lower, double upper, std::size_t count);
// Compact bumps tiling the bounding box cell by cell (supports meet only on faces).
BasisPtr make_disjoint_basis(const Domain& domain, std::vector<std::size_t> counts);

// Coefficient vector a of u^a = sum_i a_i grad b_i.
struct ControlVector {
  std::vector<double> a;
  std::size_t size() const { return a.size(); }
};

// ---------------------------------------------------------------------------
// Problem instance

struct ProblemSpec {
  std::size_t dimension = 1;
  double epsilon = 0.5;
  double sigma = 1.0;
  Point start;
  PotentialPtr potential;
  DomainPtr domain;
  ScalarFieldPtr running_cost;
  ScalarFieldPtr terminal_cost;
};

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
  std::optional<Point> location;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool ok() const;
  const CheckResult* find(const std::string& name) const;
  std::string summary() const;
};

// Regular validation grid over the closure of the domain: `per_axis` nodes per
// axis of the bounding box, keeping nodes in the closed domain.
std::vector<Point> validation_grid(const Domain& domain, std::size_t per_axis);
std::size_t default_grid_resolution(std::size_t dimension);

ValidationReport validate_problem(const ProblemSpec& spec, const BasisSet* basis = nullptr);
ValidationReport validate_basis(const BasisSet& basis, const Domain& domain);

// u^a(x) = sum_i a_i grad b_i(x).
Point control_field(const BasisSet& basis, const ControlVector& a, std::span<const double> x);

double eval_costs(const ProblemSpec& spec, std::span<const double> x, bool at_boundary);

class BasisControlField final : public VectorField {
 public:
  BasisControlField(BasisPtr basis, ControlVector a);
  std::size_t dimension() const override { return basis_->dimension(); }
  void eval(std::span<const double> x, std::span<double> out) const override;
  const BasisSet& basis() const { return *basis_; }
  const ControlVector& coefficients() const { return a_; }

 private:
  BasisPtr basis_;
  ControlVector a_;
};

class BasisGradientField final : public VectorField {
 public:
  BasisGradientField(BasisPtr basis, std::size_t index) : basis_(std::move(basis)), index_(index) {}
  std::size_t dimension() const override { return basis_->dimension(); }
  void eval(std::span<const double> x, std::span<double> out) const override {
    (*basis_)[index_].gradient(x, out);
  }

 private:
  BasisPtr basis_;
  std::size_t index_;
};

}  // namespace exitctl
