#pragma once

#include <memory>
#include <optional>
#include <string>

#include "grn/dataset.hpp"
#include "grn/linalg.hpp"
#include "grn/types.hpp"

namespace grn {

/// Problem structure exposed to Hessian approximations. Which fields are
/// populated depends on the objective:
///   power residual: residuals u(x), jacobian J(x), power_p, metric_G
///   LogSumExp:      jacobian A, softmax weights, smoothing_mu
///   logistic:       jacobian A, per_term_gradients (row i = grad f_i(x))
struct StructuralData {
  Vector residuals;
  Matrix jacobian;
  std::optional<Matrix> per_term_gradients;
  std::optional<Vector> softmax;
  std::optional<double> smoothing_mu;
  std::optional<double> power_p;
  std::optional<Matrix> metric_G;
};

/// First/second-order oracle of a smooth objective. Implementations are
/// immutable and safe to evaluate concurrently.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual std::string name() const = 0;
  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;

  virtual bool has_hessian() const { return false; }
  /// Throws DomainError when has_hessian() is false.
  virtual Matrix hessian(const Vector& x) const;
  virtual std::optional<StructuralData> structure(const Vector& /*x*/) const { return std::nullopt; }
};

using OraclePtr = std::shared_ptr<const Oracle>;

/// Vector-valued map u : R^n -> R^d with its Jacobian and, optionally, the
/// contraction sum_i w_i * Hess(u_i)(x).
class ResidualOperator {
 public:
  virtual ~ResidualOperator() = default;

  virtual std::string name() const = 0;
  virtual Index input_dim() const = 0;
  virtual Index output_dim() const = 0;
  virtual Vector residuals(const Vector& x) const = 0;
  virtual Matrix jacobian(const Vector& x) const = 0;

  virtual bool has_second_derivatives() const { return false; }
  virtual Matrix weighted_second_derivative(const Vector& x, const Vector& w) const;
  /// max_i ||Hess(u_i)|| when it is a known constant.
  virtual std::optional<double> second_derivative_bound() const { return std::nullopt; }
  virtual bool is_linear() const { return false; }
};

using ResidualPtr = std::shared_ptr<const ResidualOperator>;

// Residual operators -------------------------------------------------------

/// u(x) = A x - b.
ResidualPtr linear_residuals(Dataset data);
/// u(x) = (1 - x1, 10 (x2 - x1^2)); n = 2.
ResidualPtr rosenbrock_residuals();
/// u_1 = (1 - x_1)/2, u_i = x_i - (2 x_{i-1}^2 - 1); n = d.
ResidualPtr chebyshev_residuals(Index d);

// Objectives ----------------------------------------------------------------

/// f(x) = mu * log sum_i exp((<a_i, x> - b_i) / mu).
OraclePtr logsumexp_oracle(Dataset data, double mu);
/// f(x) = sum_i log(1 + exp(<a_i, x> - b_i)).
OraclePtr logistic_oracle(Dataset data);
/// f(x) = (1/p) <G u(x), u(x)>^{p/2}; G defaults to the identity.
OraclePtr power_residual_oracle(ResidualPtr op, double p, std::optional<Matrix> G = std::nullopt);
/// f(x) = (1/p) ||x||^p in the B-norm of np.
OraclePtr pnorm_oracle(double p, const NormPair& np);
/// f(x) = exp(x), n = 1.
OraclePtr exp_scalar_oracle();
/// f(x) = 1/2 (x - c)^T Q (x - c).
OraclePtr quadratic_oracle(Matrix Q, Vector center);

/// c * f with every derivative scaled by c.
OraclePtr scaled_oracle(OraclePtr base, double c);
/// g(x) = f(M x + shift); Hessian M^T Hess f M.
OraclePtr affine_oracle(OraclePtr base, Matrix M, Vector shift);

}  // namespace grn
