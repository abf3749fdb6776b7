#include "grn/objectives.hpp"

#include <cmath>

namespace grn {

Matrix Oracle::hessian(const Vector& /*x*/) const {
  throw DomainError(name() + ": exact Hessian is not available");
}

namespace {

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------

class LogSumExpOracle final : public Oracle {
 public:
  LogSumExpOracle(Dataset data, double mu) : data_(std::move(data)), mu_(mu) {
    if (!(mu > 0.0)) throw DomainError("logsumexp_oracle: mu must be positive");
    require_nonempty(data_, "logsumexp_oracle");
  }

  std::string name() const override { return "logsumexp"; }
  Index dim() const override { return data_.cols(); }

  double value(const Vector& x) const override {
    const Vector t = scaled_margins(x);
    const double m = t.maxCoeff();
    return mu_ * (m + std::log((t.array() - m).exp().sum()));
  }

  Vector gradient(const Vector& x) const override { return data_.A.transpose() * softmax(x); }

  bool has_hessian() const override { return true; }
  Matrix hessian(const Vector& x) const override {
    const Vector s = softmax(x);
    const Vector As = data_.A.transpose() * s;
    Matrix H = data_.A.transpose() * s.asDiagonal() * data_.A;
    H -= As * As.transpose();
    H /= mu_;
    return 0.5 * (H + H.transpose());
  }

  std::optional<StructuralData> structure(const Vector& x) const override {
    StructuralData sd;
    sd.jacobian = data_.A;
    sd.softmax = softmax(x);
    sd.smoothing_mu = mu_;
    return sd;
  }

 private:
  Vector scaled_margins(const Vector& x) const {
    require_dim(x.size(), dim(), "logsumexp_oracle");
    return (data_.A * x - data_.b) / mu_;
  }
  Vector softmax(const Vector& x) const {
    const Vector t = scaled_margins(x);
    const double m = t.maxCoeff();
    Vector e = (t.array() - m).exp();
    return e / e.sum();
  }

  Dataset data_;
  double mu_;
};

// ---------------------------------------------------------------------------

class LogisticOracle final : public Oracle {
 public:
  explicit LogisticOracle(Dataset data) : data_(std::move(data)) {
    require_nonempty(data_, "logistic_oracle");
  }

  std::string name() const override { return "logistic"; }
  Index dim() const override { return data_.cols(); }

  double value(const Vector& x) const override {
    const Vector t = margins(x);
    double f = 0.0;
    for (Index i = 0; i < t.size(); ++i) f += softplus(t[i]);
    return f;
  }

  Vector gradient(const Vector& x) const override {
    return data_.A.transpose() * derivative(margins(x));
  }

  bool has_hessian() const override { return true; }
  Matrix hessian(const Vector& x) const override {
    const Vector s = derivative(margins(x));
    const Vector w = (s.array() * (1.0 - s.array())).matrix();
    return data_.A.transpose() * w.asDiagonal() * data_.A;
  }

  std::optional<StructuralData> structure(const Vector& x) const override {
    StructuralData sd;
    sd.jacobian = data_.A;
    sd.per_term_gradients = derivative(margins(x)).asDiagonal() * data_.A;
    return sd;
  }

 private:
  Vector margins(const Vector& x) const {
    require_dim(x.size(), dim(), "logistic_oracle");
    return data_.A * x - data_.b;
  }
  static Vector derivative(const Vector& t) { return t.unaryExpr(&sigmoid); }

  Dataset data_;
};

// ---------------------------------------------------------------------------

class PowerResidualOracle final : public Oracle {
 public:
  PowerResidualOracle(ResidualPtr op, double p, std::optional<Matrix> G)
      : op_(std::move(op)), p_(p), G_(std::move(G)) {
    if (!op_) throw DomainError("power_residual_oracle: null operator");
    if (!(p >= 2.0)) throw DomainError("power_residual_oracle: p must be >= 2");
    if (G_) {
      require_dim(G_->rows(), op_->output_dim(), "power_residual_oracle metric");
      NormPair check(*G_);  // validates symmetric positive definite
    }
  }

  std::string name() const override { return "power_residual(" + op_->name() + ")"; }
  Index dim() const override { return op_->input_dim(); }

  double value(const Vector& x) const override {
    const Vector u = op_->residuals(x);
    return std::pow(norm_squared(u), 0.5 * p_) / p_;
  }

  Vector gradient(const Vector& x) const override {
    const Vector u = op_->residuals(x);
    const double r = std::sqrt(norm_squared(u));
    if (r == 0.0) return Vector::Zero(dim());
    return std::pow(r, p_ - 2.0) * (op_->jacobian(x).transpose() * metric(u));
  }

  bool has_hessian() const override { return op_->has_second_derivatives(); }

  Matrix hessian(const Vector& x) const override {
    if (!has_hessian()) return Oracle::hessian(x);
    const Vector u = op_->residuals(x);
    const double r = std::sqrt(norm_squared(u));
    const Matrix J = op_->jacobian(x);
    if (r == 0.0 && p_ > 2.0) return Matrix::Zero(dim(), dim());
    const Vector Gu = metric(u);
    const Matrix GJ = G_ ? Matrix(*G_ * J) : J;
    Matrix H = std::pow(r, p_ - 2.0) * (J.transpose() * GJ + op_->weighted_second_derivative(x, Gu));
    if (p_ > 2.0) {
      const Vector w = J.transpose() * Gu;
      H += (p_ - 2.0) * std::pow(r, p_ - 4.0) * (w * w.transpose());
    }
    return 0.5 * (H + H.transpose());
  }

  std::optional<StructuralData> structure(const Vector& x) const override {
    StructuralData sd;
    sd.residuals = op_->residuals(x);
    sd.jacobian = op_->jacobian(x);
    sd.power_p = p_;
    if (G_) sd.metric_G = *G_;
    return sd;
  }

 private:
  double norm_squared(const Vector& u) const { return G_ ? u.dot(*G_ * u) : u.squaredNorm(); }
  Vector metric(const Vector& u) const { return G_ ? Vector(*G_ * u) : u; }

  ResidualPtr op_;
  double p_;
  std::optional<Matrix> G_;
};

// ---------------------------------------------------------------------------

class PNormOracle final : public Oracle {
 public:
  PNormOracle(double p, NormPair np) : p_(p), np_(std::move(np)) {
    if (!(p >= 2.0)) throw DomainError("pnorm_oracle: p must be >= 2");
  }

  std::string name() const override { return "pnorm"; }
  Index dim() const override { return np_.dim(); }

  double value(const Vector& x) const override {
    return std::pow(np_.primal_norm(x), p_) / p_;
  }

  Vector gradient(const Vector& x) const override {
    const double r = np_.primal_norm(x);
    if (r == 0.0) return Vector::Zero(dim());
    return std::pow(r, p_ - 2.0) * (np_.B() * x);
  }

  bool has_hessian() const override { return true; }
  Matrix hessian(const Vector& x) const override {
    const double r = np_.primal_norm(x);
    if (r == 0.0) return p_ > 2.0 ? Matrix(Matrix::Zero(dim(), dim())) : np_.B();
    const Vector Bx = np_.B() * x;
    Matrix H = std::pow(r, p_ - 2.0) * np_.B();
    if (p_ > 2.0) H += (p_ - 2.0) * std::pow(r, p_ - 4.0) * (Bx * Bx.transpose());
    return H;
  }

 private:
  double p_;
  NormPair np_;
};

// ---------------------------------------------------------------------------

class ExpScalarOracle final : public Oracle {
 public:
  std::string name() const override { return "exp"; }
  Index dim() const override { return 1; }
  double value(const Vector& x) const override {
    require_dim(x.size(), 1, "exp_scalar_oracle");
    return std::exp(x[0]);
  }
  Vector gradient(const Vector& x) const override { return Vector::Constant(1, value(x)); }
  bool has_hessian() const override { return true; }
  Matrix hessian(const Vector& x) const override { return Matrix::Constant(1, 1, value(x)); }
};

class QuadraticOracle final : public Oracle {
 public:
  QuadraticOracle(Matrix Q, Vector center) : Q_(std::move(Q)), center_(std::move(center)) {
    if (Q_.rows() != Q_.cols()) throw DomainError("quadratic_oracle: Q must be square");
    require_dim(center_.size(), Q_.rows(), "quadratic_oracle center");
    Q_ = 0.5 * (Q_ + Q_.transpose()).eval();
  }

  std::string name() const override { return "quadratic"; }
  Index dim() const override { return Q_.rows(); }
  double value(const Vector& x) const override {
    require_dim(x.size(), dim(), "quadratic_oracle");
    const Vector d = x - center_;
    return 0.5 * d.dot(Q_ * d);
  }
  Vector gradient(const Vector& x) const override {
    require_dim(x.size(), dim(), "quadratic_oracle");
    return Q_ * (x - center_);
  }
  bool has_hessian() const override { return true; }
  Matrix hessian(const Vector& /*x*/) const override { return Q_; }

 private:
  Matrix Q_;
  Vector center_;
};

class ScaledOracle final : public Oracle {
 public:
  ScaledOracle(OraclePtr base, double c) : base_(std::move(base)), c_(c) {
    if (!base_) throw DomainError("scaled_oracle: null base");
    if (!(c > 0.0)) throw DomainError("scaled_oracle: c must be positive");
  }
  std::string name() const override { return "scaled(" + base_->name() + ")"; }
  Index dim() const override { return base_->dim(); }
  double value(const Vector& x) const override { return c_ * base_->value(x); }
  Vector gradient(const Vector& x) const override { return c_ * base_->gradient(x); }
  bool has_hessian() const override { return base_->has_hessian(); }
  Matrix hessian(const Vector& x) const override { return c_ * base_->hessian(x); }

 private:
  OraclePtr base_;
  double c_;
};

class AffineOracle final : public Oracle {
 public:
  AffineOracle(OraclePtr base, Matrix M, Vector shift)
      : base_(std::move(base)), M_(std::move(M)), shift_(std::move(shift)) {
    if (!base_) throw DomainError("affine_oracle: null base");
    require_dim(M_.rows(), base_->dim(), "affine_oracle map");
    require_dim(shift_.size(), base_->dim(), "affine_oracle shift");
  }
  std::string name() const override { return "affine(" + base_->name() + ")"; }
  Index dim() const override { return M_.cols(); }
  double value(const Vector& x) const override { return base_->value(map(x)); }
  Vector gradient(const Vector& x) const override {
    return M_.transpose() * base_->gradient(map(x));
  }
  bool has_hessian() const override { return base_->has_hessian(); }
  Matrix hessian(const Vector& x) const override {
    return M_.transpose() * base_->hessian(map(x)) * M_;
  }

 private:
  Vector map(const Vector& x) const {
    require_dim(x.size(), dim(), "affine_oracle");
    return M_ * x + shift_;
  }
  OraclePtr base_;
  Matrix M_;
  Vector shift_;
};

}  // namespace

OraclePtr logsumexp_oracle(Dataset data, double mu) {
  return std::make_shared<LogSumExpOracle>(std::move(data), mu);
}
OraclePtr logistic_oracle(Dataset data) { return std::make_shared<LogisticOracle>(std::move(data)); }
OraclePtr power_residual_oracle(ResidualPtr op, double p, std::optional<Matrix> G) {
  return std::make_shared<PowerResidualOracle>(std::move(op), p, std::move(G));
}
OraclePtr pnorm_oracle(double p, const NormPair& np) { return std::make_shared<PNormOracle>(p, np); }
OraclePtr exp_scalar_oracle() { return std::make_shared<ExpScalarOracle>(); }
OraclePtr quadratic_oracle(Matrix Q, Vector center) {
  return std::make_shared<QuadraticOracle>(std::move(Q), std::move(center));
}
OraclePtr scaled_oracle(OraclePtr base, double c) {
  return std::make_shared<ScaledOracle>(std::move(base), c);
}
OraclePtr affine_oracle(OraclePtr base, Matrix M, Vector shift) {
  return std::make_shared<AffineOracle>(std::move(base), std::move(M), std::move(shift));
}

}  // namespace grn
