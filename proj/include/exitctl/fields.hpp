#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace exitctl {

using Point = std::vector<double>;

class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual double value(std::span<const double> x) const = 0;
  virtual std::string describe() const = 0;
};

class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual std::size_t dimension() const = 0;
  virtual void eval(std::span<const double> x, std::span<double> out) const = 0;

  Point operator()(std::span<const double> x) const {
    Point out(dimension());
    eval(x, out);
    return out;
  }
};

using ScalarFieldPtr = std::shared_ptr<const ScalarField>;
using VectorFieldPtr = std::shared_ptr<const VectorField>;

class ConstantScalarField final : public ScalarField {
 public:
  explicit ConstantScalarField(double c) : c_(c) {}
  double value(std::span<const double>) const override { return c_; }
  std::string describe() const override;
  double constant() const { return c_; }

 private:
  double c_;
};

// c + sum_k (linear_k x_k + quadratic_k x_k^2); missing coefficients are zero.
class PolynomialScalarField final : public ScalarField {
 public:
  PolynomialScalarField(double constant, std::vector<double> linear, std::vector<double> quadratic);
  double value(std::span<const double> x) const override;
  std::string describe() const override;

 private:
  double constant_;
  std::vector<double> linear_;
  std::vector<double> quadratic_;
};

class FunctionScalarField final : public ScalarField {
 public:
  FunctionScalarField(std::function<double(std::span<const double>)> f, std::string name)
      : f_(std::move(f)), name_(std::move(name)) {}
  double value(std::span<const double> x) const override { return f_(x); }
  std::string describe() const override { return name_; }

 private:
  std::function<double(std::span<const double>)> f_;
  std::string name_;
};

class ZeroVectorField final : public VectorField {
 public:
  explicit ZeroVectorField(std::size_t d) : d_(d) {}
  std::size_t dimension() const override { return d_; }
  void eval(std::span<const double>, std::span<double> out) const override;

 private:
  std::size_t d_;
};

class ConstantVectorField final : public VectorField {
 public:
  explicit ConstantVectorField(Point c) : c_(std::move(c)) {}
  std::size_t dimension() const override { return c_.size(); }
  void eval(std::span<const double>, std::span<double> out) const override;

 private:
  Point c_;
};

// slope * (x - center), componentwise.
class LinearVectorField final : public VectorField {
 public:
  LinearVectorField(double slope, Point center) : slope_(slope), center_(std::move(center)) {}
  std::size_t dimension() const override { return center_.size(); }
  void eval(std::span<const double> x, std::span<double> out) const override;

 private:
  double slope_;
  Point center_;
};

class FunctionVectorField final : public VectorField {
 public:
  using Fn = std::function<void(std::span<const double>, std::span<double>)>;
  FunctionVectorField(std::size_t d, Fn f) : d_(d), f_(std::move(f)) {}
  std::size_t dimension() const override { return d_; }
  void eval(std::span<const double> x, std::span<double> out) const override { f_(x, out); }

 private:
  std::size_t d_;
  Fn f_;
};

// alpha * f + beta * g.
class CombinedVectorField final : public VectorField {
 public:
  CombinedVectorField(double alpha, VectorFieldPtr f, double beta, VectorFieldPtr g);
  std::size_t dimension() const override { return f_->dimension(); }
  void eval(std::span<const double> x, std::span<double> out) const override;

 private:
  double alpha_;
  VectorFieldPtr f_;
  double beta_;
  VectorFieldPtr g_;
};

}  // namespace exitctl
