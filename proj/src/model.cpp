#include "exitctl/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace exitctl {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
  os << ")";
  return os.str();
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 1) return {0.5 * (a + b)};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

// Cartesian product of per-axis coordinate lists, last axis fastest.
std::vector<Point> tensor_points(const std::vector<std::vector<double>>& axes) {
  std::vector<Point> pts;
  std::size_t total = 1;
  for (const auto& ax : axes) total *= ax.size();
  pts.reserve(total);
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Point p(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k) p[k] = axes[k][idx[k]];
    pts.push_back(std::move(p));
    for (std::size_t k = axes.size(); k-- > 0;) {
      if (++idx[k] < axes[k].size()) break;
      idx[k] = 0;
    }
  }
  return pts;
}

}  // namespace

// ---------------------------------------------------------------------------
// Potentials

void ZeroPotential::gradient(std::span<const double>, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

QuadraticPotential::QuadraticPotential(std::vector<double> stiffness, Point center)
    : stiffness_(std::move(stiffness)), center_(std::move(center)) {
  if (stiffness_.size() != center_.size()) throw std::invalid_argument("quadratic potential: size mismatch");
}

double QuadraticPotential::value(std::span<const double> x) const {
  double v = 0.0;
  for (std::size_t k = 0; k < center_.size(); ++k) {
    const double dx = x[k] - center_[k];
    v += 0.5 * stiffness_[k] * dx * dx;
  }
  return v;
}

void QuadraticPotential::gradient(std::span<const double> x, std::span<double> out) const {
  for (std::size_t k = 0; k < center_.size(); ++k) out[k] = stiffness_[k] * (x[k] - center_[k]);
}

double DoubleWellPotential::value(std::span<const double> x) const {
  const double s = x[0] * x[0] - a_ * a_;
  return height_ * s * s;
}

void DoubleWellPotential::gradient(std::span<const double> x, std::span<double> out) const {
  out[0] = 4.0 * height_ * x[0] * (x[0] * x[0] - a_ * a_);
}

GridPotential::GridPotential(std::vector<std::vector<double>> axes, std::vector<double> values,
                             std::vector<double> gradients)
    : axes_(std::move(axes)), values_(std::move(values)), gradients_(std::move(gradients)) {
  const std::size_t d = axes_.size();
  if (d == 0) throw std::invalid_argument("grid potential: no axes");
  strides_.assign(d, 1);
  std::size_t total = 1;
  for (std::size_t k = d; k-- > 0;) {
    if (axes_[k].size() < 2) throw std::invalid_argument("grid potential: each axis needs at least two nodes");
    strides_[k] = total;
    total *= axes_[k].size();
  }
  if (values_.size() != total || gradients_.size() != total * d)
    throw std::invalid_argument("grid potential: table is not a full tensor grid");
}

std::shared_ptr<GridPotential> GridPotential::from_csv(const std::filesystem::path& path, std::size_t d) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open potential table " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty()) continue;  // header
      throw std::runtime_error("potential table: non-numeric row: " + line);
    }
    if (row.size() != 2 * d + 1)
      throw std::runtime_error("potential table: expected " + std::to_string(2 * d + 1) + " columns");
    rows.push_back(std::move(row));
  }
  std::vector<std::vector<double>> axes(d);
  for (const auto& r : rows)
    for (std::size_t k = 0; k < d; ++k) axes[k].push_back(r[k]);
  for (auto& ax : axes) {
    std::sort(ax.begin(), ax.end());
    ax.erase(std::unique(ax.begin(), ax.end()), ax.end());
  }
  std::size_t total = 1;
  std::vector<std::size_t> strides(d, 1);
  for (std::size_t k = d; k-- > 0;) {
    strides[k] = total;
    total *= axes[k].size();
  }
  if (rows.size() != total) throw std::runtime_error("potential table is not a full tensor grid");
  std::vector<double> values(total), grads(total * d);
  std::vector<char> seen(total, 0);
  for (const auto& r : rows) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const auto it = std::lower_bound(axes[k].begin(), axes[k].end(), r[k]);
      idx += static_cast<std::size_t>(it - axes[k].begin()) * strides[k];
    }
    if (seen[idx]) throw std::runtime_error("potential table: duplicate node");
    seen[idx] = 1;
    values[idx] = r[d];
    for (std::size_t k = 0; k < d; ++k) grads[idx * d + k] = r[d + 1 + k];
  }
  return std::make_shared<GridPotential>(std::move(axes), std::move(values), std::move(grads));
}

template <typename Fn>
void GridPotential::interpolate(std::span<const double> x, Fn&& visit) const {
  const std::size_t d = axes_.size();
  std::size_t base = 0;
  std::array<double, 16> t{};
  std::array<std::size_t, 16> stride{};
  if (d > t.size()) throw std::invalid_argument("grid potential: dimension too large");
  for (std::size_t k = 0; k < d; ++k) {
    const auto& ax = axes_[k];
    const double xc = std::clamp(x[k], ax.front(), ax.back());
    auto j = static_cast<std::size_t>(std::upper_bound(ax.begin(), ax.end(), xc) - ax.begin());
    j = std::clamp<std::size_t>(j, 1, ax.size() - 1) - 1;
    t[k] = (xc - ax[j]) / (ax[j + 1] - ax[j]);
    base += j * strides_[k];
    stride[k] = strides_[k];
  }
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double w = 1.0;
    std::size_t idx = base;
    for (std::size_t k = 0; k < d; ++k) {
      if (corner & (std::size_t{1} << k)) {
        w *= t[k];
        idx += stride[k];
      } else {
        w *= 1.0 - t[k];
      }
    }
    if (w != 0.0) visit(idx, w);
  }
}

double GridPotential::value(std::span<const double> x) const {
  double v = 0.0;
  interpolate(x, [&](std::size_t idx, double w) { v += w * values_[idx]; });
  return v;
}

void GridPotential::gradient(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = axes_.size();
  std::fill(out.begin(), out.end(), 0.0);
  interpolate(x, [&](std::size_t idx, double w) {
    for (std::size_t k = 0; k < d; ++k) out[k] += w * gradients_[idx * d + k];
  });
}

// ---------------------------------------------------------------------------
// Domains

bool Domain::in_bounding_box(std::span<const double> x) const {
  const Point lo = lower(), hi = upper();
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] < lo[k] - tol_ || x[k] > hi[k] + tol_) return false;
  return true;
}

bool Domain::in_closure(std::span<const double> x) const {
  return contains(x) || boundary_distance(x) <= tol_;
}

BoxDomain::BoxDomain(Point lower, Point upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.empty()) throw std::invalid_argument("box: bad bounds");
}

bool BoxDomain::contains(std::span<const double> x) const {
  for (std::size_t k = 0; k < lower_.size(); ++k)
    if (!(x[k] > lower_[k] && x[k] < upper_[k])) return false;
  return true;
}

double BoxDomain::boundary_distance(std::span<const double> x) const {
  if (contains(x)) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lower_.size(); ++k) m = std::min({m, x[k] - lower_[k], upper_[k] - x[k]});
    return m;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    const double e = std::max({lower_[k] - x[k], 0.0, x[k] - upper_[k]});
    s += e * e;
  }
  return std::sqrt(s);
}

Point BoxDomain::segment_exit_point(std::span<const double> inside, std::span<const double> outside) const {
  const std::size_t d = lower_.size();
  double t_exit = 1.0;
  std::size_t axis = 0;
  double face = 0.0;
  bool found = false;
  for (std::size_t k = 0; k < d; ++k) {
    const double dx = outside[k] - inside[k];
    double t = 2.0, f = 0.0;
    if (outside[k] >= upper_[k] && dx > 0) {
      t = (upper_[k] - inside[k]) / dx;
      f = upper_[k];
    } else if (outside[k] <= lower_[k] && dx < 0) {
      t = (lower_[k] - inside[k]) / dx;
      f = lower_[k];
    }
    if (t <= t_exit || (!found && t <= 1.0)) {
      t_exit = std::clamp(t, 0.0, 1.0);
      axis = k;
      face = f;
      found = true;
    }
  }
  Point y(d);
  for (std::size_t k = 0; k < d; ++k)
    y[k] = std::clamp(inside[k] + t_exit * (outside[k] - inside[k]), lower_[k], upper_[k]);
  if (found) y[axis] = face;
  return y;
}

Point BoxDomain::nearest_boundary_point(std::span<const double> x) const {
  const std::size_t d = lower_.size();
  Point y(d);
  for (std::size_t k = 0; k < d; ++k) y[k] = std::clamp(x[k], lower_[k], upper_[k]);
  if (contains(y)) {
    std::size_t axis = 0;
    double best = std::numeric_limits<double>::infinity();
    double face = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      if (y[k] - lower_[k] < best) best = y[k] - lower_[k], axis = k, face = lower_[k];
      if (upper_[k] - y[k] < best) best = upper_[k] - y[k], axis = k, face = upper_[k];
    }
    y[axis] = face;
  }
  return y;
}

double BoxDomain::bridge_exit_probability(std::span<const double> x0, std::span<const double> x1,
                                          double variance, Point& exit_point) const {
  const std::size_t d = lower_.size();
  double survive = 1.0;
  double best = 0.0;
  std::size_t best_axis = 0;
  double best_face = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    for (int side = 0; side < 2; ++side) {
      const double face = side ? upper_[k] : lower_[k];
      const double d0 = std::abs(x0[k] - face), d1 = std::abs(x1[k] - face);
      const double expo = 2.0 * d0 * d1 / variance;
      if (expo > 40.0) continue;
      const double p = std::exp(-expo);
      survive *= 1.0 - p;
      if (p > best) best = p, best_axis = k, best_face = face;
    }
  }
  if (best > 0.0) {
    exit_point.resize(d);
    for (std::size_t k = 0; k < d; ++k) exit_point[k] = std::clamp(0.5 * (x0[k] + x1[k]), lower_[k], upper_[k]);
    exit_point[best_axis] = best_face;
  }
  return 1.0 - survive;
}

std::vector<Point> BoxDomain::boundary_samples(std::size_t per_axis) const {
  const std::size_t d = lower_.size();
  if (d == 1) return {Point{lower_[0]}, Point{upper_[0]}};
  std::vector<Point> out;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<std::vector<double>> axes(d);
    for (std::size_t j = 0; j < d; ++j) axes[j] = linspace(lower_[j], upper_[j], std::max<std::size_t>(per_axis, 2));
    for (const double face : {lower_[k], upper_[k]}) {
      axes[k] = {face};
      for (auto& p : tensor_points(axes)) out.push_back(std::move(p));
    }
  }
  return out;
}

BallDomain::BallDomain(Point center, double radius) : center_(std::move(center)), radius_(radius) {
  if (center_.empty() || !(radius_ > 0.0)) throw std::invalid_argument("ball: bad centre or radius");
}

bool BallDomain::contains(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < center_.size(); ++k) s += (x[k] - center_[k]) * (x[k] - center_[k]);
  return s < radius_ * radius_;
}

double BallDomain::boundary_distance(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < center_.size(); ++k) s += (x[k] - center_[k]) * (x[k] - center_[k]);
  return std::abs(std::sqrt(s) - radius_);
}

Point BallDomain::segment_exit_point(std::span<const double> inside, std::span<const double> outside) const {
  const std::size_t d = center_.size();
  double a = 0.0, b = 0.0, c = -radius_ * radius_;
  for (std::size_t k = 0; k < d; ++k) {
    const double dx = outside[k] - inside[k], p = inside[k] - center_[k];
    a += dx * dx;
    b += 2.0 * p * dx;
    c += p * p;
  }
  double t = 1.0;
  if (a > 0.0) {
    const double disc = std::max(b * b - 4.0 * a * c, 0.0);
    t = std::clamp((-b + std::sqrt(disc)) / (2.0 * a), 0.0, 1.0);
  }
  Point y(d);
  for (std::size_t k = 0; k < d; ++k) y[k] = inside[k] + t * (outside[k] - inside[k]);
  return nearest_boundary_point(y);
}

Point BallDomain::nearest_boundary_point(std::span<const double> x) const {
  const std::size_t d = center_.size();
  double r = 0.0;
  for (std::size_t k = 0; k < d; ++k) r += (x[k] - center_[k]) * (x[k] - center_[k]);
  r = std::sqrt(r);
  Point y(d);
  if (r == 0.0) {
    y = center_;
    y[0] += radius_;
    return y;
  }
  for (std::size_t k = 0; k < d; ++k) y[k] = center_[k] + radius_ * (x[k] - center_[k]) / r;
  return y;
}

double BallDomain::bridge_exit_probability(std::span<const double> x0, std::span<const double> x1,
                                           double variance, Point& exit_point) const {
  const double d0 = boundary_distance(x0), d1 = boundary_distance(x1);
  const double expo = 2.0 * d0 * d1 / variance;
  if (expo > 40.0) return 0.0;
  Point mid(center_.size());
  for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = 0.5 * (x0[k] + x1[k]);
  exit_point = nearest_boundary_point(mid);
  return std::exp(-expo);
}

Point BallDomain::lower() const {
  Point p = center_;
  for (double& v : p) v -= radius_;
  return p;
}

Point BallDomain::upper() const {
  Point p = center_;
  for (double& v : p) v += radius_;
  return p;
}

std::vector<Point> BallDomain::boundary_samples(std::size_t per_axis) const {
  const std::size_t d = center_.size();
  std::vector<Point> out;
  if (d == 1) return {Point{center_[0] - radius_}, Point{center_[0] + radius_}};
  if (d == 2) {
    const std::size_t n = std::max<std::size_t>(4 * per_axis, 8);
    for (std::size_t i = 0; i < n; ++i) {
      const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
      out.push_back({center_[0] + radius_ * std::cos(th), center_[1] + radius_ * std::sin(th)});
    }
    return out;
  }
  BoxDomain cube(Point(d, -1.0), Point(d, 1.0));
  for (auto& p : cube.boundary_samples(per_axis)) {
    for (std::size_t k = 0; k < d; ++k) p[k] += center_[k];
    out.push_back(nearest_boundary_point(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Basis

bool Support::contains(std::span<const double> x) const {
  switch (kind) {
    case Kind::everywhere:
      return true;
    case Kind::ball: {
      double s = 0.0;
      for (std::size_t k = 0; k < center.size(); ++k) s += (x[k] - center[k]) * (x[k] - center[k]);
      return s <= radius * radius;
    }
    case Kind::box:
      for (std::size_t k = 0; k < lower.size(); ++k)
        if (x[k] < lower[k] || x[k] > upper[k]) return false;
      return true;
  }
  return false;
}

bool Support::interior_contains(std::span<const double> x) const {
  switch (kind) {
    case Kind::everywhere:
      return true;
    case Kind::ball: {
      double s = 0.0;
      for (std::size_t k = 0; k < center.size(); ++k) s += (x[k] - center[k]) * (x[k] - center[k]);
      return s < radius * radius;
    }
    case Kind::box:
      for (std::size_t k = 0; k < lower.size(); ++k)
        if (x[k] <= lower[k] || x[k] >= upper[k]) return false;
      return true;
  }
  return false;
}

GaussianBump::GaussianBump(Point center, double width)
    : center_(std::move(center)), inv_w2_(1.0 / (width * width)), width_(width) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian bump: width must be positive");
}

double GaussianBump::value(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < center_.size(); ++k) s += (x[k] - center_[k]) * (x[k] - center_[k]);
  return std::exp(-0.5 * s * inv_w2_);
}

void GaussianBump::gradient(std::span<const double> x, std::span<double> out) const {
  const double b = value(x);
  for (std::size_t k = 0; k < center_.size(); ++k) out[k] = -(x[k] - center_[k]) * inv_w2_ * b;
}

Support GaussianBump::support() const {
  Support s;
  s.kind = Support::Kind::ball;
  s.center = center_;
  s.radius = width_ * std::sqrt(-2.0 * std::log(kSupportThreshold));
  return s;
}

double CubicBSpline::value(std::span<const double> x) const {
  const double t = std::abs((x[0] - center_) / h_);
  if (t >= 2.0) return 0.0;
  if (t >= 1.0) {
    const double r = 2.0 - t;
    return r * r * r / 6.0;
  }
  return (4.0 - 6.0 * t * t + 3.0 * t * t * t) / 6.0;
}

void CubicBSpline::gradient(std::span<const double> x, std::span<double> out) const {
  const double s = (x[0] - center_) / h_;
  const double t = std::abs(s);
  double g = 0.0;
  if (t < 1.0) {
    g = -2.0 * s + 1.5 * s * t;
  } else if (t < 2.0) {
    const double r = 2.0 - t;
    g = -(s > 0 ? 1.0 : -1.0) * 0.5 * r * r;
  }
  out[0] = g / h_;
}

Support CubicBSpline::support() const {
  Support s;
  s.kind = Support::Kind::box;
  s.lower = {center_ - 2.0 * h_};
  s.upper = {center_ + 2.0 * h_};
  return s;
}

CompactBump::CompactBump(Point center, Point half_widths) : center_(std::move(center)), half_(std::move(half_widths)) {
  if (center_.size() != half_.size()) throw std::invalid_argument("compact bump: size mismatch");
}

double CompactBump::value(std::span<const double> x) const {
  double v = 1.0;
  for (std::size_t k = 0; k < center_.size(); ++k) {
    const double s = (x[k] - center_[k]) / half_[k];
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    v *= q * q * q;
  }
  return v;
}

void CompactBump::gradient(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = center_.size();
  std::array<double, 16> f{}, df{};
  for (std::size_t k = 0; k < d; ++k) {
    const double s = (x[k] - center_[k]) / half_[k];
    if (std::abs(s) >= 1.0) {
      std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
      return;
    }
    const double q = 1.0 - s * s;
    f[k] = q * q * q;
    df[k] = -6.0 * s * q * q / half_[k];
  }
  for (std::size_t k = 0; k < d; ++k) {
    double g = df[k];
    for (std::size_t j = 0; j < d; ++j)
      if (j != k) g *= f[j];
    out[k] = g;
  }
}

Support CompactBump::support() const {
  Support s;
  s.kind = Support::Kind::box;
  s.lower = center_;
  s.upper = center_;
  for (std::size_t k = 0; k < center_.size(); ++k) {
    s.lower[k] -= half_[k];
    s.upper[k] += half_[k];
  }
  return s;
}

Monomial::Monomial(std::size_t dimension, std::size_t axis, int power, double scale)
    : d_(dimension), axis_(axis), power_(power), scale_(scale) {
  if (axis_ >= d_ || power_ < 0) throw std::invalid_argument("monomial: bad axis or power");
}

double Monomial::value(std::span<const double> x) const { return scale_ * std::pow(x[axis_], power_); }

void Monomial::gradient(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(d_), 0.0);
  if (power_ > 0) out[axis_] = scale_ * power_ * std::pow(x[axis_], power_ - 1);
}

BasisSet::BasisSet(std::size_t dimension, std::vector<BasisFunctionPtr> functions, bool disjoint_supports)
    : d_(dimension), functions_(std::move(functions)), disjoint_(disjoint_supports) {
  if (functions_.empty()) throw std::invalid_argument("basis: at least one function is required");
}

void BasisSet::gradients(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < functions_.size(); ++i) functions_[i]->gradient(x, out.subspan(i * d_, d_));
}

double BasisSet::combination(std::span<const double> a, std::span<const double> x) const {
  double v = 0.0;
  for (std::size_t i = 0; i < functions_.size(); ++i) v += a[i] * functions_[i]->value(x);
  return v;
}

double centre_spacing(double lower, double upper, std::size_t count, CentreLayout layout) {
  if (layout == CentreLayout::cells) return (upper - lower) / static_cast<double>(std::max<std::size_t>(count, 1));
  return count > 1 ? (upper - lower) / static_cast<double>(count - 1) : 0.5 * (upper - lower);
}

BasisPtr make_gaussian_basis(const Domain& domain, std::vector<std::size_t> counts, std::optional<double> width,
                             CentreLayout layout) {
  const std::size_t d = domain.dimension();
  if (counts.size() == 1 && d > 1) counts.assign(d, counts[0]);
  if (counts.size() != d) throw std::invalid_argument("gaussian basis: counts must match dimension");
  const Point lo = domain.lower(), hi = domain.upper();
  std::vector<std::vector<double>> axes(d);
  for (std::size_t k = 0; k < d; ++k) {
    if (layout == CentreLayout::nodes) {
      axes[k] = linspace(lo[k], hi[k], counts[k]);
      continue;
    }
    const double h = centre_spacing(lo[k], hi[k], counts[k], layout);
    for (std::size_t i = 0; i < counts[k]; ++i) axes[k].push_back(lo[k] + h * (static_cast<double>(i) + 0.5));
  }
  const double w = width.value_or(centre_spacing(lo[0], hi[0], counts[0], layout));
  std::vector<BasisFunctionPtr> fns;
  for (auto& c : tensor_points(axes)) fns.push_back(std::make_shared<GaussianBump>(std::move(c), w));
  return std::make_shared<BasisSet>(d, std::move(fns));
}

BasisPtr make_bspline_basis(double lower, double upper, std::size_t count) {
  if (count < 2) throw std::invalid_argument("bspline basis: need at least two functions");
  const double h = (upper - lower) / static_cast<double>(count - 1);
  std::vector<BasisFunctionPtr> fns;
  for (std::size_t i = 0; i < count; ++i)
    fns.push_back(std::make_shared<CubicBSpline>(lower + h * static_cast<double>(i), h));
  return std::make_shared<BasisSet>(1, std::move(fns));
}

BasisPtr make_disjoint_basis(const Domain& domain, std::vector<std::size_t> counts) {
  const std::size_t d = domain.dimension();
  if (counts.size() == 1 && d > 1) counts.assign(d, counts[0]);
  if (counts.size() != d) throw std::invalid_argument("disjoint basis: counts must match dimension");
  const Point lo = domain.lower(), hi = domain.upper();
  std::vector<std::vector<double>> axes(d);
  Point half(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double cell = (hi[k] - lo[k]) / static_cast<double>(counts[k]);
    half[k] = 0.5 * cell;
    for (std::size_t i = 0; i < counts[k]; ++i) axes[k].push_back(lo[k] + cell * (static_cast<double>(i) + 0.5));
  }
  std::vector<BasisFunctionPtr> fns;
  for (auto& c : tensor_points(axes)) fns.push_back(std::make_shared<CompactBump>(std::move(c), half));
  return std::make_shared<BasisSet>(d, std::move(fns), true);
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << ": " << c.detail;
    if (c.location) os << " at " << format_point(*c.location);
    os << "\n";
  }
  return os.str();
}

std::size_t default_grid_resolution(std::size_t dimension) {
  if (dimension == 1) return 256;
  if (dimension == 2) return 64;
  return std::max<std::size_t>(4, static_cast<std::size_t>(std::pow(4096.0, 1.0 / static_cast<double>(dimension))));
}

std::vector<Point> validation_grid(const Domain& domain, std::size_t per_axis) {
  const Point lo = domain.lower(), hi = domain.upper();
  std::vector<std::vector<double>> axes(lo.size());
  for (std::size_t k = 0; k < lo.size(); ++k) axes[k] = linspace(lo[k], hi[k], per_axis);
  std::vector<Point> out;
  for (auto& p : tensor_points(axes))
    if (domain.in_closure(p)) out.push_back(std::move(p));
  return out;
}

namespace {

void add(ValidationReport& r, std::string name, bool ok, std::string detail = {},
         std::optional<Point> where = std::nullopt) {
  r.checks.push_back({std::move(name), ok, std::move(detail), std::move(where)});
}

// Evaluates f at each point; reports the first failing point.
template <typename Pred>
void check_points(ValidationReport& r, const std::string& name, const std::vector<Point>& pts, Pred&& pred) {
  for (const auto& p : pts) {
    std::string why;
    bool ok = false;
    try {
      ok = pred(p, why);
    } catch (const std::exception& e) {
      why = std::string("not evaluable: ") + e.what();
    }
    if (!ok) {
      add(r, name, false, why, p);
      return;
    }
  }
  add(r, name, true);
}

}  // namespace

ValidationReport validate_basis(const BasisSet& basis, const Domain& domain) {
  ValidationReport r;
  const std::size_t n = basis.size();
  if (basis.dimension() != domain.dimension()) {
    add(r, "basis_dimension", false, "basis dimension differs from domain dimension");
    return r;
  }
  add(r, "basis_dimension", true);
  const auto grid = validation_grid(domain, default_grid_resolution(domain.dimension()));
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd values(m, static_cast<Eigen::Index>(n));
  for (Eigen::Index p = 0; p < m; ++p)
    for (std::size_t i = 0; i < n; ++i) values(p, static_cast<Eigen::Index>(i)) = basis[i].value(grid[p]);

  bool nonconstant = true;
  std::string which;
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = values.col(static_cast<Eigen::Index>(i));
    const double span = col.maxCoeff() - col.minCoeff();
    if (!(span > 1e-12 * std::max(1.0, col.cwiseAbs().maxCoeff()))) {
      nonconstant = false;
      which = "b_" + std::to_string(i) + " is constant on the validation grid";
      break;
    }
  }
  add(r, "basis_nonconstant", nonconstant, which);

  const Eigen::MatrixXd gram = values.transpose() * values / static_cast<double>(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double lmin = eig.eigenvalues().minCoeff(), lmax = eig.eigenvalues().maxCoeff();
  const double cond = lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  std::ostringstream cs;
  cs << "Gram condition number " << cond << " (limit 1e8)";
  add(r, "basis_independent", cond < 1e8, cs.str());

  std::vector<Support> supports;
  for (std::size_t i = 0; i < n; ++i) supports.push_back(basis[i].support());
  bool volume_ok = true;
  std::string vdetail;
  for (std::size_t i = 0; i < n && volume_ok; ++i) {
    const auto hits = std::count_if(grid.begin(), grid.end(), [&](const Point& p) { return supports[i].contains(p); });
    if (hits == 0) volume_ok = false, vdetail = "support of b_" + std::to_string(i) + " has no grid points";
  }
  add(r, "basis_support_volume", volume_ok, vdetail);

  check_points(r, "basis_support_cover", grid, [&](const Point& p, std::string& why) {
    const bool covered = std::any_of(supports.begin(), supports.end(), [&](const Support& s) { return s.contains(p); });
    if (!covered) why = "point not covered by any support";
    return covered;
  });

  if (basis.disjoint_supports()) {
    bool disjoint = true;
    std::string ddetail;
    std::optional<Point> where;
    for (const auto& p : grid) {
      std::size_t inside = 0;
      for (const auto& s : supports) inside += s.interior_contains(p) ? 1 : 0;
      if (inside > 1) {
        disjoint = false;
        ddetail = "interiors of two supports overlap";
        where = p;
        break;
      }
    }
    add(r, "basis_disjoint_supports", disjoint, ddetail, where);
  }
  return r;
}

ValidationReport validate_problem(const ProblemSpec& spec, const BasisSet* basis) {
  ValidationReport r;
  const std::size_t d = spec.dimension;
  bool dims_ok = d >= 1 && spec.potential && spec.domain && spec.running_cost && spec.terminal_cost;
  std::string ddetail = dims_ok ? "" : "dimension must be >= 1 and every field populated";
  if (dims_ok && (spec.potential->dimension() != d || spec.domain->dimension() != d || spec.start.size() != d)) {
    dims_ok = false;
    ddetail = "potential, domain and start point must share the problem dimension";
  }
  add(r, "dimension", dims_ok, ddetail);
  add(r, "epsilon_positive", spec.epsilon > 0.0, spec.epsilon > 0.0 ? "" : "epsilon must be > 0");
  add(r, "sigma_positive", spec.sigma > 0.0, spec.sigma > 0.0 ? "" : "sigma must be > 0");
  if (!dims_ok) return r;

  const Domain& dom = *spec.domain;
  const Point lo = dom.lower(), hi = dom.upper();
  bool bounded = true;
  for (std::size_t k = 0; k < d; ++k) bounded = bounded && std::isfinite(lo[k]) && std::isfinite(hi[k]) && lo[k] < hi[k];
  add(r, "domain_bounded", bounded, bounded ? "" : "bounding box must be finite and non-degenerate");
  if (!bounded) return r;
  add(r, "start_interior", dom.contains(spec.start), dom.contains(spec.start) ? "" : "start point is not interior",
      dom.contains(spec.start) ? std::nullopt : std::optional<Point>(spec.start));

  const auto grid = validation_grid(dom, default_grid_resolution(d));
  std::vector<Point> box_grid;
  {
    const std::size_t per = default_grid_resolution(d);
    std::vector<std::vector<double>> axes(d);
    for (std::size_t k = 0; k < d; ++k) axes[k] = linspace(lo[k], hi[k], per);
    box_grid = tensor_points(axes);
  }
  Point g(d);
  check_points(r, "potential_evaluable", box_grid, [&](const Point& p, std::string& why) {
    const double v = spec.potential->value(p);
    spec.potential->gradient(p, g);
    bool ok = std::isfinite(v);
    for (double gi : g) ok = ok && std::isfinite(gi);
    if (!ok) why = "V or grad V is not finite";
    return ok;
  });
  if (const auto& growth = spec.potential->growth()) {
    check_points(r, "growth_conditions", box_grid, [&](const Point& p, std::string& why) {
      const double v = spec.potential->value(p);
      spec.potential->gradient(p, g);
      const double x2 = norm2(p);
      const bool lin = std::abs(v) <= growth->k0 * (1.0 + std::sqrt(x2));
      const bool quad = norm2(g) <= growth->k1 * growth->k1 * (1.0 + x2);
      if (!lin) why = "|V(x)| > K0 (1 + |x|)";
      if (!quad) why = "|grad V(x)|^2 > K1^2 (1 + |x|^2)";
      return lin && quad;
    });
  }
  check_points(r, "running_cost_evaluable", grid, [&](const Point& p, std::string& why) {
    const bool ok = std::isfinite(spec.running_cost->value(p));
    if (!ok) why = "running cost is not finite";
    return ok;
  });
  check_points(r, "running_cost_nonnegative", grid, [&](const Point& p, std::string& why) {
    const double v = spec.running_cost->value(p);
    if (!(v >= 0.0)) {
      std::ostringstream os;
      os << "running cost " << v << " < 0";
      why = os.str();
      return false;
    }
    return true;
  });
  check_points(r, "terminal_cost_evaluable", dom.boundary_samples(default_grid_resolution(d)),
               [&](const Point& p, std::string& why) {
                 const bool ok = std::isfinite(spec.terminal_cost->value(p));
                 if (!ok) why = "terminal cost is not finite";
                 return ok;
               });
  if (basis) {
    auto br = validate_basis(*basis, dom);
    r.checks.insert(r.checks.end(), br.checks.begin(), br.checks.end());
  }
  return r;
}

Point control_field(const BasisSet& basis, const ControlVector& a, std::span<const double> x) {
  if (a.size() != basis.size())
    throw std::invalid_argument("control_field: coefficient vector has length " + std::to_string(a.size()) +
                                " but the basis has " + std::to_string(basis.size()) + " functions");
  const std::size_t d = basis.dimension();
  Point u(d, 0.0), g(d);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    basis[i].gradient(x, g);
    for (std::size_t k = 0; k < d; ++k) u[k] += a.a[i] * g[k];
  }
  return u;
}

double eval_costs(const ProblemSpec& spec, std::span<const double> x, bool at_boundary) {
  if (!spec.domain->in_bounding_box(x)) throw std::out_of_range("eval_costs: point " + format_point(x) + " is outside the bounding box");
  return at_boundary ? spec.terminal_cost->value(x) : spec.running_cost->value(x);
}

BasisControlField::BasisControlField(BasisPtr basis, ControlVector a) : basis_(std::move(basis)), a_(std::move(a)) {
  if (a_.size() != basis_->size()) throw std::invalid_argument("basis control: coefficient length mismatch");
}

void BasisControlField::eval(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = basis_->dimension();
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
  std::array<double, 16> g{};
  for (std::size_t i = 0; i < basis_->size(); ++i) {
    if (a_.a[i] == 0.0) continue;
    (*basis_)[i].gradient(x, std::span<double>(g.data(), d));
    for (std::size_t k = 0; k < d; ++k) out[k] += a_.a[i] * g[k];
  }
}

}  // namespace exitctl
