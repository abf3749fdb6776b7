#include "grn/objectives.hpp"

namespace grn {

Matrix ResidualOperator::weighted_second_derivative(const Vector& /*x*/, const Vector& /*w*/) const {
  throw DomainError(name() + ": second derivatives are not available");
}

namespace {

class LinearResiduals final : public ResidualOperator {
 public:
  explicit LinearResiduals(Dataset data) : data_(std::move(data)) {
    require_nonempty(data_, "linear_residuals");
  }

  std::string name() const override { return "linear"; }
  Index input_dim() const override { return data_.cols(); }
  Index output_dim() const override { return data_.rows(); }

  Vector residuals(const Vector& x) const override {
    require_dim(x.size(), input_dim(), "linear_residuals");
    return data_.A * x - data_.b;
  }
  Matrix jacobian(const Vector& /*x*/) const override { return data_.A; }

  bool has_second_derivatives() const override { return true; }
  Matrix weighted_second_derivative(const Vector& /*x*/, const Vector& /*w*/) const override {
    return Matrix::Zero(input_dim(), input_dim());
  }
  std::optional<double> second_derivative_bound() const override { return 0.0; }
  bool is_linear() const override { return true; }

 private:
  Dataset data_;
};

class RosenbrockResiduals final : public ResidualOperator {
 public:
  std::string name() const override { return "rosenbrock"; }
  Index input_dim() const override { return 2; }
  Index output_dim() const override { return 2; }

  Vector residuals(const Vector& x) const override {
    require_dim(x.size(), 2, "rosenbrock_residuals");
    return Vector{{1.0 - x[0], 10.0 * (x[1] - x[0] * x[0])}};
  }
  Matrix jacobian(const Vector& x) const override {
    require_dim(x.size(), 2, "rosenbrock_residuals");
    Matrix J(2, 2);
    J << -1.0, 0.0, -20.0 * x[0], 10.0;
    return J;
  }

  bool has_second_derivatives() const override { return true; }
  // Only Hess(u_2) is nonzero: -20 at (0,0).
  Matrix weighted_second_derivative(const Vector& /*x*/, const Vector& w) const override {
    require_dim(w.size(), 2, "rosenbrock_residuals weights");
    Matrix out = Matrix::Zero(2, 2);
    out(0, 0) = -20.0 * w[1];
    return out;
  }
  std::optional<double> second_derivative_bound() const override { return 20.0; }
};

class ChebyshevResiduals final : public ResidualOperator {
 public:
  explicit ChebyshevResiduals(Index d) : d_(d) {
    if (d < 1) throw DomainError("chebyshev_residuals: d must be >= 1");
  }

  std::string name() const override { return "chebyshev"; }
  Index input_dim() const override { return d_; }
  Index output_dim() const override { return d_; }

  Vector residuals(const Vector& x) const override {
    require_dim(x.size(), d_, "chebyshev_residuals");
    Vector u(d_);
    u[0] = 0.5 * (1.0 - x[0]);
    for (Index i = 1; i < d_; ++i) u[i] = x[i] - (2.0 * x[i - 1] * x[i - 1] - 1.0);
    return u;
  }
  Matrix jacobian(const Vector& x) const override {
    require_dim(x.size(), d_, "chebyshev_residuals");
    Matrix J = Matrix::Zero(d_, d_);
    J(0, 0) = -0.5;
    for (Index i = 1; i < d_; ++i) {
      J(i, i) = 1.0;
      J(i, i - 1) = -4.0 * x[i - 1];
    }
    return J;
  }

  bool has_second_derivatives() const override { return true; }
  // Hess(u_i) has the single entry -4 at (i-1, i-1).
  Matrix weighted_second_derivative(const Vector& /*x*/, const Vector& w) const override {
    require_dim(w.size(), d_, "chebyshev_residuals weights");
    Matrix out = Matrix::Zero(d_, d_);
    for (Index i = 1; i < d_; ++i) out(i - 1, i - 1) = -4.0 * w[i];
    return out;
  }
  std::optional<double> second_derivative_bound() const override { return d_ > 1 ? 4.0 : 0.0; }

 private:
  Index d_;
};

}  // namespace

ResidualPtr linear_residuals(Dataset data) {
  return std::make_shared<LinearResiduals>(std::move(data));
}
ResidualPtr rosenbrock_residuals() { return std::make_shared<RosenbrockResiduals>(); }
ResidualPtr chebyshev_residuals(Index d) { return std::make_shared<ChebyshevResiduals>(d); }

}  // namespace grn
