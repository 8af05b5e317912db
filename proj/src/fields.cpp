#include "exitctl/fields.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace exitctl {

std::string ConstantScalarField::describe() const {
  std::ostringstream os;
  os << "constant(" << c_ << ")";
  return os.str();
}

PolynomialScalarField::PolynomialScalarField(double constant, std::vector<double> linear,
                                             std::vector<double> quadratic)
    : constant_(constant), linear_(std::move(linear)), quadratic_(std::move(quadratic)) {}

double PolynomialScalarField::value(std::span<const double> x) const {
  double v = constant_;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k < linear_.size()) v += linear_[k] * x[k];
    if (k < quadratic_.size()) v += quadratic_[k] * x[k] * x[k];
  }
  return v;
}

std::string PolynomialScalarField::describe() const {
  std::ostringstream os;
  os << "polynomial(c=" << constant_ << ")";
  return os.str();
}

void ZeroVectorField::eval(std::span<const double>, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

void ConstantVectorField::eval(std::span<const double>, std::span<double> out) const {
  std::copy(c_.begin(), c_.end(), out.begin());
}

void LinearVectorField::eval(std::span<const double> x, std::span<double> out) const {
  for (std::size_t k = 0; k < center_.size(); ++k) out[k] = slope_ * (x[k] - center_[k]);
}

CombinedVectorField::CombinedVectorField(double alpha, VectorFieldPtr f, double beta, VectorFieldPtr g)
    : alpha_(alpha), f_(std::move(f)), beta_(beta), g_(std::move(g)) {
  if (f_->dimension() != g_->dimension()) throw std::invalid_argument("combined field: dimension mismatch");
}

void CombinedVectorField::eval(std::span<const double> x, std::span<double> out) const {
  Point tmp(out.size());
  f_->eval(x, out);
  g_->eval(x, tmp);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = alpha_ * out[k] + beta_ * tmp[k];
}

}  // namespace exitctl
