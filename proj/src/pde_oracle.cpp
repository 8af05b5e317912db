#include "exitctl/pde_oracle.hpp"

#include "exitctl/csv.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace exitctl {

namespace {

void require_dimension(std::size_t d) {
  if (d != 1 && d != 2) throw UnsupportedDimension("oracle supports d ∈ {1,2}");
}

// Three-point weights on arms (hl, hr): value = wl f_l + w0 f_0 + wr f_r.
struct Stencil {
  double wl, w0, wr;
};

Stencil second_derivative(double hl, double hr) {
  return {2.0 / (hl * (hl + hr)), -2.0 / (hl * hr), 2.0 / (hr * (hl + hr))};
}

Stencil first_derivative(double hl, double hr) {
  return {-hr / (hl * (hl + hr)), (hr - hl) / (hl * hr), hl / (hr * (hl + hr))};
}

// Fills values at exterior nodes from in-domain neighbours, layer by layer.
void extend_exterior(const Grid& grid, std::vector<double>& values, std::size_t stride) {
  std::vector<char> known(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) known[i] = grid.in_domain(i);
  bool progress = true;
  while (progress) {
    progress = false;
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (known[i]) continue;
      const auto ijk = grid.multi_index(i);
      std::vector<double> acc(stride, 0.0);
      std::size_t count = 0;
      for (std::size_t k = 0; k < grid.dim; ++k)
        for (int s : {-1, 1}) {
          auto nb = ijk;
          if ((s < 0 && nb[k] == 0) || (s > 0 && nb[k] + 1 == grid.n[k])) continue;
          nb[k] = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(nb[k]) + s);
          const std::size_t j = grid.index(nb);
          if (!known[j]) continue;
          for (std::size_t c = 0; c < stride; ++c) acc[c] += values[j * stride + c];
          ++count;
        }
      if (count == 0) continue;
      for (std::size_t c = 0; c < stride; ++c) values[i * stride + c] = acc[c] / static_cast<double>(count);
      layer.push_back(i);
    }
    for (std::size_t i : layer) known[i] = 1;
    progress = !layer.empty();
  }
}

struct BvpCoefficients {
  std::function<void(std::span<const double>, std::span<double>)> drift;  // b
  std::function<double(std::span<const double>)> reaction;                 // c
  std::function<double(std::span<const double>)> source;                   // f
  std::function<double(std::span<const double>)> dirichlet;                // g
};

struct BvpSolution {
  bool ok = false;
  std::vector<double> values;  // in-domain nodes; NaN outside
  std::size_t upwind_nodes = 0;
  std::string reason;
};

// eps Lap v + b.grad v - c v = f inside, v = g on the boundary.
BvpSolution solve_bvp(const Grid& grid, double eps, const BvpCoefficients& co) {
  const std::size_t d = grid.dim;
  std::vector<std::int64_t> unknown(grid.size(), -1);
  std::size_t n_unknown = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.kind[i] == NodeKind::interior) unknown[i] = static_cast<std::int64_t>(n_unknown++);

  BvpSolution out;
  out.values.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.kind[i] == NodeKind::boundary) out.values[i] = co.dirichlet(grid.node(i));
  if (n_unknown == 0) {
    out.ok = true;
    return out;
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n_unknown * (2 * d + 1));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n_unknown));
  Point b(d);
  std::vector<char> upwinded(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (unknown[i] < 0) continue;
    const auto row = unknown[i];
    const Point x = grid.node(i);
    co.drift(x, b);
    double diag = -co.reaction(x);
    double r = co.source(x);
    for (std::size_t k = 0; k < d; ++k) {
      const Arm& L = grid.arm(i, k, 0);
      const Arm& R = grid.arm(i, k, 1);
      const double hl = L.length, hr = R.length;
      const Stencil s2 = second_derivative(hl, hr);
      Stencil s1 = first_derivative(hl, hr);
      if (std::abs(b[k]) * std::max(hl, hr) / (2.0 * eps) > 1.0) {
        upwinded[i] = 1;
        s1 = b[k] > 0 ? Stencil{0.0, -1.0 / hr, 1.0 / hr} : Stencil{-1.0 / hl, 1.0 / hl, 0.0};
      }
      const double wl = eps * s2.wl + b[k] * s1.wl;
      const double wr = eps * s2.wr + b[k] * s1.wr;
      diag += eps * s2.w0 + b[k] * s1.w0;
      for (const auto& [arm, w] : {std::pair<const Arm&, double>{L, wl}, std::pair<const Arm&, double>{R, wr}}) {
        if (arm.neighbor >= 0 && unknown[static_cast<std::size_t>(arm.neighbor)] >= 0) {
          triplets.emplace_back(row, unknown[static_cast<std::size_t>(arm.neighbor)], w);
        } else {
          const double g = arm.neighbor >= 0 ? out.values[static_cast<std::size_t>(arm.neighbor)]
                                             : co.dirichlet(arm.boundary_point);
          r -= w * g;
        }
      }
    }
    triplets.emplace_back(row, row, diag);
    rhs[row] = r;
  }
  out.upwind_nodes = static_cast<std::size_t>(std::count(upwinded.begin(), upwinded.end(), 1));

  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(n_unknown), static_cast<Eigen::Index>(n_unknown));
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    out.reason = "sparse factorization failed: " + lu.lastErrorMessage();
    return out;
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) {
    out.reason = "sparse solve failed";
    return out;
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (unknown[i] >= 0) out.values[i] = sol[unknown[i]];
  out.ok = true;
  return out;
}

}  // namespace

Point Grid::node(std::size_t idx) const {
  Point x(dim);
  for (std::size_t k = dim; k-- > 0;) {
    x[k] = lower[k] + h[k] * static_cast<double>(idx % n[k]);
    idx /= n[k];
  }
  return x;
}

std::size_t Grid::index(std::span<const std::size_t> ijk) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < dim; ++k) idx = idx * n[k] + ijk[k];
  return idx;
}

std::vector<std::size_t> Grid::multi_index(std::size_t idx) const {
  std::vector<std::size_t> ijk(dim);
  for (std::size_t k = dim; k-- > 0;) {
    ijk[k] = idx % n[k];
    idx /= n[k];
  }
  return ijk;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (double hk : h) v *= hk;
  return v;
}

Grid make_grid(const Domain& domain, double h) {
  require_dimension(domain.dimension());
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  Grid g;
  g.dim = domain.dimension();
  g.lower = domain.lower();
  const Point hi = domain.upper();
  std::size_t total = 1;
  for (std::size_t k = 0; k < g.dim; ++k) {
    const double extent = hi[k] - g.lower[k];
    const auto cells = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(extent / h)));
    g.n.push_back(cells + 1);
    g.h.push_back(extent / static_cast<double>(cells));
    total *= cells + 1;
  }
  g.kind.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    const Point x = g.node(i);
    g.kind[i] = domain.contains(x) ? NodeKind::interior
                                   : (domain.in_closure(x) ? NodeKind::boundary : NodeKind::exterior);
  }
  g.arms.resize(total * 2 * g.dim);
  for (std::size_t i = 0; i < total; ++i) {
    if (g.kind[i] != NodeKind::interior) continue;
    const auto ijk = g.multi_index(i);
    const Point x = g.node(i);
    for (std::size_t k = 0; k < g.dim; ++k)
      for (int side = 0; side < 2; ++side) {
        Arm& arm = g.arms[i * 2 * g.dim + 2 * k + static_cast<std::size_t>(side)];
        auto nb = ijk;
        nb[k] = side ? nb[k] + 1 : nb[k] - 1;  // interior nodes are never on the box faces
        const std::size_t j = g.index(nb);
        if (g.kind[j] != NodeKind::exterior) {
          arm.length = g.h[k];
          arm.neighbor = static_cast<std::int64_t>(j);
        } else {
          arm.boundary_point = domain.segment_exit_point(x, g.node(j));
          arm.length = std::max(std::abs(arm.boundary_point[k] - x[k]), 1e-12 * g.h[k]);
          arm.neighbor = -1;
        }
      }
  }
  return g;
}

std::vector<double> nodal_gradient(const Grid& grid, const std::vector<double>& values,
                                   const std::function<double(std::span<const double>)>& boundary_value) {
  const std::size_t d = grid.dim;
  std::vector<double> grad(grid.size() * d, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.kind[i] == NodeKind::exterior) continue;
    if (grid.kind[i] == NodeKind::interior) {
      for (std::size_t k = 0; k < d; ++k) {
        const Arm& L = grid.arm(i, k, 0);
        const Arm& R = grid.arm(i, k, 1);
        const double fl = L.neighbor >= 0 ? values[static_cast<std::size_t>(L.neighbor)] : boundary_value(L.boundary_point);
        const double fr = R.neighbor >= 0 ? values[static_cast<std::size_t>(R.neighbor)] : boundary_value(R.boundary_point);
        const Stencil s = first_derivative(L.length, R.length);
        grad[i * d + k] = s.wl * fl + s.w0 * values[i] + s.wr * fr;
      }
      continue;
    }
    const auto ijk = grid.multi_index(i);
    for (std::size_t k = 0; k < d; ++k) {
      auto at = [&](std::ptrdiff_t off) -> std::optional<double> {
        const auto pos = static_cast<std::ptrdiff_t>(ijk[k]) + off;
        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(grid.n[k])) return std::nullopt;
        auto nb = ijk;
        nb[k] = static_cast<std::size_t>(pos);
        const std::size_t j = grid.index(nb);
        if (!grid.in_domain(j)) return std::nullopt;
        return values[j];
      };
      const double hk = grid.h[k];
      const auto m1 = at(-1), p1 = at(1);
      double g = 0.0;
      if (m1 && p1) {
        g = (*p1 - *m1) / (2.0 * hk);
      } else if (p1) {
        const auto p2 = at(2);
        g = p2 ? (-3.0 * values[i] + 4.0 * *p1 - *p2) / (2.0 * hk) : (*p1 - values[i]) / hk;
      } else if (m1) {
        const auto m2 = at(-2);
        g = m2 ? (3.0 * values[i] - 4.0 * *m1 + *m2) / (2.0 * hk) : (values[i] - *m1) / hk;
      }
      grad[i * d + k] = g;
    }
  }
  return grad;
}

PdeSolution solve_feynman_kac(const ProblemSpec& spec, const Grid& grid) {
  require_dimension(spec.dimension);
  if (grid.dim != spec.dimension) throw std::invalid_argument("grid dimension differs from problem dimension");
  const double sigma = spec.sigma, eps = spec.epsilon;
  BvpCoefficients co;
  co.drift = [&](std::span<const double> x, std::span<double> b) {
    spec.potential->gradient(x, b);
    for (double& v : b) v = -v;
  };
  co.reaction = [&](std::span<const double> x) { return sigma * spec.running_cost->value(x); };
  co.source = [](std::span<const double>) { return 0.0; };
  co.dirichlet = [&](std::span<const double> y) { return std::exp(-sigma * spec.terminal_cost->value(y)); };
  BvpSolution bvp = solve_bvp(grid, eps, co);
  if (!bvp.ok) throw std::runtime_error("Feynman-Kac system could not be solved: " + bvp.reason);

  PdeSolution sol;
  sol.grid = grid;
  sol.epsilon = eps;
  sol.sigma = sigma;
  sol.psi = std::move(bvp.values);
  sol.upwind_nodes = bvp.upwind_nodes;
  if (sol.upwind_nodes > 0)
    sol.warnings.push_back("cell Peclet number above 1 at " + std::to_string(sol.upwind_nodes) +
                           " nodes; upwind differences used there");
  sol.F.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.in_domain(i)) continue;
    if (!(sol.psi[i] > 0.0)) throw std::runtime_error("Feynman-Kac solution is not positive; check grid and coefficients");
    sol.F[i] = -std::log(sol.psi[i]) / sigma;
  }
  sol.gradF = nodal_gradient(grid, sol.F, [&](std::span<const double> y) { return spec.terminal_cost->value(y); });
  sol.u_opt.resize(sol.gradF.size());
  for (std::size_t i = 0; i < sol.gradF.size(); ++i) sol.u_opt[i] = -2.0 * eps * sigma * sol.gradF[i];
  extend_exterior(grid, sol.psi, 1);
  extend_exterior(grid, sol.F, 1);
  extend_exterior(grid, sol.gradF, grid.dim);
  extend_exterior(grid, sol.u_opt, grid.dim);
  return sol;
}

HjbResidual hjb_residual(const Grid& grid, const std::vector<double>& F, const ProblemSpec& spec) {
  const std::size_t d = grid.dim;
  const double eps = spec.epsilon, sigma = spec.sigma;
  auto boundary = [&](std::span<const double> y) { return spec.terminal_cost->value(y); };
  HjbResidual out;
  out.residual.assign(grid.size(), 0.0);
  Point gv(d);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.kind[i] != NodeKind::interior) continue;
    const Point x = grid.node(i);
    spec.potential->gradient(x, gv);
    double lap = 0.0, drift = 0.0, grad2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const Arm& L = grid.arm(i, k, 0);
      const Arm& R = grid.arm(i, k, 1);
      const double fl = L.neighbor >= 0 ? F[static_cast<std::size_t>(L.neighbor)] : boundary(L.boundary_point);
      const double fr = R.neighbor >= 0 ? F[static_cast<std::size_t>(R.neighbor)] : boundary(R.boundary_point);
      const Stencil s2 = second_derivative(L.length, R.length);
      const Stencil s1 = first_derivative(L.length, R.length);
      lap += s2.wl * fl + s2.w0 * F[i] + s2.wr * fr;
      const double g = s1.wl * fl + s1.w0 * F[i] + s1.wr * fr;
      drift += gv[k] * g;
      grad2 += g * g;
    }
    const double r = eps * lap - drift - eps * sigma * grad2 + spec.running_cost->value(x);
    out.residual[i] = r;
    out.max_norm = std::max(out.max_norm, std::abs(r));
  }
  return out;
}

HjbResidual hjb_residual(const PdeSolution& sol, const ProblemSpec& spec) { return hjb_residual(sol.grid, sol.F, spec); }

MgfResult exit_mgf(const ProblemSpec& spec, const Grid& grid, const VectorFieldPtr& u, double lambda) {
  require_dimension(spec.dimension);
  BvpCoefficients co;
  const std::size_t d = spec.dimension;
  co.drift = [&](std::span<const double> x, std::span<double> b) {
    Point gv(d);
    spec.potential->gradient(x, gv);
    if (u)
      u->eval(x, b);
    else
      std::fill(b.begin(), b.end(), 0.0);
    for (std::size_t k = 0; k < d; ++k) b[k] -= gv[k];
  };
  // Unknown w = v - 1 vanishes on the boundary, so lambda = 0 returns v = 1 exactly.
  co.reaction = [&](std::span<const double>) { return -lambda; };
  co.source = [&](std::span<const double>) { return -lambda; };
  co.dirichlet = [](std::span<const double>) { return 0.0; };
  MgfResult out;
  BvpSolution bvp = solve_bvp(grid, spec.epsilon, co);
  if (!bvp.ok) {
    out.reason = bvp.reason;
    return out;
  }
  out.v = std::move(bvp.values);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.in_domain(i)) continue;
    out.v[i] += 1.0;
    if (!(out.v[i] > 0.0)) {
      out.reason = "moment generating function not positive; lambda beyond the finiteness threshold";
      out.v.clear();
      return out;
    }
  }
  out.ok = true;
  return out;
}

MgfThreshold exit_mgf_threshold(const ProblemSpec& spec, const Grid& grid, const VectorFieldPtr& u, double rel_tol) {
  MgfThreshold t;
  double lo = 0.0, hi = 1.0;
  while (exit_mgf(spec, grid, u, hi).ok) {
    lo = hi;
    hi *= 1.5;
    ++t.iterations;
    if (hi > 1e12) throw std::runtime_error("exit-time MGF threshold not bracketed");
  }
  while (hi - lo > rel_tol * std::max(lo, 1e-12) * 0.5) {
    const double mid = 0.5 * (lo + hi);
    (exit_mgf(spec, grid, u, mid).ok ? lo : hi) = mid;
    ++t.iterations;
  }
  t.lower = lo;
  t.upper = hi;
  t.lambda_star = 0.5 * (lo + hi);
  return t;
}

ProjectionResult project_control(const PdeSolution& sol, const BasisSet& basis) {
  const Grid& grid = sol.grid;
  const std::size_t d = grid.dim, n = basis.size();
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.in_domain(i)) nodes.push_back(i);
  const auto rows = static_cast<Eigen::Index>(nodes.size() * d);
  Eigen::MatrixXd A(rows, static_cast<Eigen::Index>(n));
  Eigen::VectorXd y(rows);
  std::vector<double> g(n * d);
  const double sw = std::sqrt(grid.cell_volume());
  for (std::size_t p = 0; p < nodes.size(); ++p) {
    const Point x = grid.node(nodes[p]);
    basis.gradients(x, g);
    for (std::size_t k = 0; k < d; ++k) {
      const auto r = static_cast<Eigen::Index>(p * d + k);
      for (std::size_t i = 0; i < n; ++i) A(r, static_cast<Eigen::Index>(i)) = sw * g[i * d + k];
      y[r] = sw * sol.u_opt[nodes[p] * d + k];
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (static_cast<std::size_t>(qr.rank()) < n) {
    std::ostringstream os;
    os << "rank-deficient normal equations: basis entries";
    for (Eigen::Index c = qr.rank(); c < static_cast<Eigen::Index>(n); ++c) os << " " << qr.colsPermutation().indices()[c];
    os << " depend linearly on the others";
    throw std::runtime_error(os.str());
  }
  const Eigen::VectorXd a = qr.solve(y);
  ProjectionResult out;
  out.a.a.assign(a.data(), a.data() + a.size());
  out.residual = (A * a - y).norm();
  out.u_norm = y.norm();
  return out;
}

double control_distance(const PdeSolution& sol, const BasisSet& basis, const ControlVector& a) {
  const Grid& grid = sol.grid;
  const std::size_t d = grid.dim;
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.in_domain(i)) continue;
    const Point x = grid.node(i);
    const Point ua = control_field(basis, a, x);
    for (std::size_t k = 0; k < d; ++k) {
      const double e = sol.u_opt[i * d + k] - ua[k];
      s += e * e;
    }
  }
  return std::sqrt(s * grid.cell_volume());
}

PoincareReport poincare_error_report(const PdeSolution& sol, const ProblemSpec& spec, const ScalarField& F_approx,
                                     double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("poincare_error_report: p must be >= 1");
  const Grid& grid = sol.grid;
  if (sol.F.size() != grid.size()) throw std::invalid_argument("poincare_error_report: grid mismatch");
  const std::size_t d = grid.dim;
  std::vector<double> err(grid.size(), 0.0);
  double mean = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.in_domain(i)) continue;
    err[i] = sol.F[i] - F_approx.value(grid.node(i));
    mean += err[i];
    ++count;
  }
  mean /= static_cast<double>(count);
  const auto grad = nodal_gradient(grid, err, [&](std::span<const double> y) {
    return spec.terminal_cost->value(y) - F_approx.value(y);
  });
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.in_domain(i)) continue;
    lhs += std::pow(std::abs(err[i] - mean), p);
    double g2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) g2 += grad[i * d + k] * grad[i * d + k];
    rhs += std::pow(std::sqrt(g2), p);
  }
  const double w = grid.cell_volume();
  return {std::pow(lhs * w, 1.0 / p), std::pow(rhs * w, 1.0 / p)};
}

BasisFreeEnergy::BasisFreeEnergy(BasisPtr basis, ControlVector a, double epsilon, double sigma)
    : basis_(std::move(basis)), a_(std::move(a)), scale_(-1.0 / (2.0 * epsilon * sigma)) {
  if (a_.size() != basis_->size()) throw std::invalid_argument("basis free energy: coefficient length mismatch");
}

double BasisFreeEnergy::value(std::span<const double> x) const { return scale_ * basis_->combination(a_.a, x); }

namespace {

template <typename Visit>
void multilinear(const Grid& grid, std::span<const double> x, Visit&& visit) {
  const std::size_t d = grid.dim;
  std::size_t base[2] = {0, 0};
  double t[2] = {0.0, 0.0};
  for (std::size_t k = 0; k < d; ++k) {
    const double s = (x[k] - grid.lower[k]) / grid.h[k];
    const auto cells = static_cast<double>(grid.n[k] - 1);
    const double sc = std::clamp(s, 0.0, cells);
    auto j = static_cast<std::size_t>(std::floor(sc));
    if (j >= grid.n[k] - 1) j = grid.n[k] - 2;
    base[k] = j;
    t[k] = sc - static_cast<double>(j);
  }
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double w = 1.0;
    std::size_t ijk[2];
    for (std::size_t k = 0; k < d; ++k) {
      const bool up = corner & (std::size_t{1} << k);
      w *= up ? t[k] : 1.0 - t[k];
      ijk[k] = base[k] + (up ? 1 : 0);
    }
    if (w != 0.0) visit(grid.index(std::span<const std::size_t>(ijk, d)), w);
  }
}

}  // namespace

double interpolate_nodal(const Grid& grid, const std::vector<double>& values, std::span<const double> x) {
  double v = 0.0;
  multilinear(grid, x, [&](std::size_t idx, double w) { v += w * values[idx]; });
  return v;
}

GridVectorField::GridVectorField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size() * grid_.dim) throw std::invalid_argument("grid field: value count mismatch");
}

void GridVectorField::eval(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = grid_.dim;
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
  multilinear(grid_, x, [&](std::size_t idx, double w) {
    for (std::size_t k = 0; k < d; ++k) out[k] += w * values_[idx * d + k];
  });
}

VectorFieldPtr optimal_control_field(const PdeSolution& sol) {
  return std::make_shared<GridVectorField>(sol.grid, sol.u_opt);
}

void write_solution_csv(const PdeSolution& sol, const std::filesystem::path& path) {
  const Grid& g = sol.grid;
  const std::size_t d = g.dim;
  CsvWriter w(path);
  std::vector<std::string> cols;
  for (std::size_t k = 0; k < d; ++k) cols.push_back("x_" + std::to_string(k + 1));
  cols.push_back("psi");
  cols.push_back("F");
  for (std::size_t k = 0; k < d; ++k) cols.push_back("gradF_" + std::to_string(k + 1));
  for (std::size_t k = 0; k < d; ++k) cols.push_back("u_opt_" + std::to_string(k + 1));
  w.header(cols);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.in_domain(i)) continue;
    for (double c : g.node(i)) w << c;
    w << sol.psi[i] << sol.F[i];
    for (std::size_t k = 0; k < d; ++k) w << sol.gradF[i * d + k];
    for (std::size_t k = 0; k < d; ++k) w << sol.u_opt[i * d + k];
    w.end_row();
  }
}

}  // namespace exitctl
