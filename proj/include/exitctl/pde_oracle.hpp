#pragma once

#include "exitctl/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace exitctl {

enum class NodeKind : std::uint8_t { interior, boundary, exterior };

// Neighbour of an interior node along one axis direction. When the grid
// neighbour lies outside the domain the arm is shortened to the boundary
// crossing and `neighbor` is -1.
struct Arm {
  double length = 0.0;
  std::int64_t neighbor = -1;
  Point boundary_point;
};

// Regular node lattice over the bounding box (d = 1 or 2).
struct Grid {
  std::size_t dim = 1;
  Point lower;
  std::vector<double> h;
  std::vector<std::size_t> n;
  std::vector<NodeKind> kind;
  std::vector<Arm> arms;  // 2 * dim per node (axis k: 2k lower side, 2k+1 upper side)

  std::size_t size() const { return kind.size(); }
  Point node(std::size_t idx) const;
  std::size_t index(std::span<const std::size_t> ijk) const;
  std::vector<std::size_t> multi_index(std::size_t idx) const;
  bool in_domain(std::size_t idx) const { return kind[idx] != NodeKind::exterior; }
  const Arm& arm(std::size_t idx, std::size_t axis, int side) const { return arms[idx * 2 * dim + 2 * axis + side]; }
  double cell_volume() const;
};

// Spacing is adjusted per axis so that nodes land on the box faces.
Grid make_grid(const Domain& domain, double h);

struct PdeSolution {
  Grid grid;
  double epsilon = 0.0;
  double sigma = 0.0;
  std::vector<double> psi;
  std::vector<double> F;
  std::vector<double> gradF;  // dim entries per node
  std::vector<double> u_opt;  // dim entries per node
  std::size_t upwind_nodes = 0;
  std::vector<std::string> warnings;
};

// Thrown when the oracle is asked for d outside {1, 2}.
struct UnsupportedDimension : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

PdeSolution solve_feynman_kac(const ProblemSpec& spec, const Grid& grid);

struct HjbResidual {
  std::vector<double> residual;  // zero off the interior
  double max_norm = 0.0;
};

HjbResidual hjb_residual(const PdeSolution& sol, const ProblemSpec& spec);
// Same residual for an arbitrary nodal F with boundary data kappa_t.
HjbResidual hjb_residual(const Grid& grid, const std::vector<double>& F, const ProblemSpec& spec);

struct MgfResult {
  bool ok = false;
  std::vector<double> v;
  std::string reason;
};

// v(x) = E^{u,x}[exp(lambda tau)] from eps Lap v + (u - grad V).grad v + lambda v = 0, v = 1 on the boundary.
MgfResult exit_mgf(const ProblemSpec& spec, const Grid& grid, const VectorFieldPtr& u, double lambda);

struct MgfThreshold {
  double lambda_star = 0.0;
  double lower = 0.0;  // last solvable lambda
  double upper = 0.0;  // first failing lambda
  std::size_t iterations = 0;
};

MgfThreshold exit_mgf_threshold(const ProblemSpec& spec, const Grid& grid, const VectorFieldPtr& u,
                                double rel_tol = 1e-3);

struct ProjectionResult {
  ControlVector a;
  double residual = 0.0;  // grid L2 norm of u_opt - u^a
  double u_norm = 0.0;    // grid L2 norm of u_opt
};

ProjectionResult project_control(const PdeSolution& sol, const BasisSet& basis);
// Grid L2 distance between u_opt and u^a.
double control_distance(const PdeSolution& sol, const BasisSet& basis, const ControlVector& a);

struct PoincareReport {
  double lhs = 0.0;  // |F_err - mean F_err|_p
  double rhs = 0.0;  // |grad F_err|_p
};

PoincareReport poincare_error_report(const PdeSolution& sol, const ProblemSpec& spec, const ScalarField& F_approx,
                                     double p);

// F implied by a basis control: -(sum a_i b_i) / (2 eps sigma).
class BasisFreeEnergy final : public ScalarField {
 public:
  BasisFreeEnergy(BasisPtr basis, ControlVector a, double epsilon, double sigma);
  double value(std::span<const double> x) const override;
  std::string describe() const override { return "basis free energy"; }

 private:
  BasisPtr basis_;
  ControlVector a_;
  double scale_;
};

// Multilinear interpolation of a nodal vector field; nodes outside the domain
// carry values extended from their neighbours.
class GridVectorField final : public VectorField {
 public:
  GridVectorField(Grid grid, std::vector<double> values);
  std::size_t dimension() const override { return grid_.dim; }
  void eval(std::span<const double> x, std::span<double> out) const override;

 private:
  Grid grid_;
  std::vector<double> values_;
};

VectorFieldPtr optimal_control_field(const PdeSolution& sol);
// Nodewise gradient of a field known on in-domain nodes; `boundary_value`
// supplies values at shortened-arm boundary crossings.
std::vector<double> nodal_gradient(const Grid& grid, const std::vector<double>& values,
                                   const std::function<double(std::span<const double>)>& boundary_value);
// Value of the solution at an in-domain point by multilinear interpolation.
double interpolate_nodal(const Grid& grid, const std::vector<double>& values, std::span<const double> x);

// Columns: x_1..x_d, psi, F, gradF_1..gradF_d, u_opt_1..u_opt_d (in-domain nodes).
void write_solution_csv(const PdeSolution& sol, const std::filesystem::path& path);

}  // namespace exitctl
