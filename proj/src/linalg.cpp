#include "grn/linalg.hpp"

#include <cmath>

namespace grn {

NormPair::NormPair(Matrix B) : B_(std::move(B)) {
  if (B_.rows() != B_.cols() || B_.rows() == 0) {
    throw DomainError("NormPair: B must be a non-empty square matrix");
  }
  const double scale = std::max(1.0, B_.cwiseAbs().maxCoeff());
  if ((B_ - B_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError("NormPair: B is not symmetric");
  }
  Eigen::LLT<Matrix> llt(B_);
  if (llt.info() != Eigen::Success) {
    throw DomainError("NormPair: B is not positive definite");
  }
  L_ = llt.matrixL();
  identity_ = B_.isIdentity(0.0);
}

NormPair NormPair::identity(Index n) { return NormPair(Matrix::Identity(n, n)); }

double NormPair::primal_norm(const Vector& v) const {
  require_dim(v.size(), dim(), "primal_norm");
  if (identity_) return v.norm();
  return (L_.transpose() * v).norm();
}

double NormPair::dual_norm(const Vector& s) const {
  require_dim(s.size(), dim(), "dual_norm");
  if (identity_) return s.norm();
  return L_.triangularView<Eigen::Lower>().solve(s).norm();
}

Vector NormPair::solve(const Vector& s) const {
  require_dim(s.size(), dim(), "NormPair::solve");
  if (identity_) return s;
  Vector y = L_.triangularView<Eigen::Lower>().solve(s);
  return L_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix NormPair::whiten(const Matrix& M) const {
  require_dim(M.rows(), dim(), "NormPair::whiten");
  if (identity_) return M;
  Matrix left = L_.triangularView<Eigen::Lower>().solve(M);
  Matrix both = L_.triangularView<Eigen::Lower>().solve(left.transpose());
  return both.transpose();
}

// ---------------------------------------------------------------------------

PsdOperator PsdOperator::zero(Index n) {
  PsdOperator op;
  op.kind_ = Kind::kZero;
  op.dim_ = n;
  return op;
}

PsdOperator PsdOperator::dense(Matrix m) {
  if (m.rows() != m.cols()) throw DomainError("PsdOperator::dense: matrix must be square");
  PsdOperator op;
  op.kind_ = Kind::kDense;
  op.dim_ = m.rows();
  op.dense_ = std::move(m);
  return op;
}

PsdOperator PsdOperator::constant_dense(std::shared_ptr<const Matrix> m) {
  if (!m || m->rows() != m->cols()) {
    throw DomainError("PsdOperator::constant_dense: matrix must be square");
  }
  PsdOperator op;
  op.kind_ = Kind::kConstantDense;
  op.dim_ = m->rows();
  op.shared_ = std::move(m);
  return op;
}

PsdOperator PsdOperator::rank_one(double c, Vector v, double base_scale,
                                  std::shared_ptr<const Matrix> base) {
  if (c < 0.0 || base_scale < 0.0) {
    throw DomainError("PsdOperator::rank_one: coefficients must be nonnegative");
  }
  if (base_scale > 0.0 && (!base || base->rows() != v.size())) {
    throw DomainError("PsdOperator::rank_one: scaled base requires a matching base matrix");
  }
  PsdOperator op;
  op.kind_ = Kind::kRankOne;
  op.dim_ = v.size();
  op.c_ = c;
  op.v_ = std::move(v);
  op.base_scale_ = base_scale;
  op.shared_ = std::move(base);
  return op;
}

const Matrix& PsdOperator::matrix() const {
  switch (kind_) {
    case Kind::kDense:
      return dense_;
    case Kind::kConstantDense:
      return *shared_;
    default:
      throw DomainError("PsdOperator::matrix: operator is not dense");
  }
}

Vector PsdOperator::apply(const Vector& h) const {
  require_dim(h.size(), dim_, "PsdOperator::apply");
  switch (kind_) {
    case Kind::kZero:
      return Vector::Zero(dim_);
    case Kind::kDense:
      return dense_ * h;
    case Kind::kConstantDense:
      return *shared_ * h;
    case Kind::kRankOne: {
      Vector out = (c_ * v_.dot(h)) * v_;
      if (base_scale_ > 0.0) out += base_scale_ * (*shared_ * h);
      return out;
    }
  }
  return Vector::Zero(dim_);
}

Matrix PsdOperator::to_dense() const {
  switch (kind_) {
    case Kind::kZero:
      return Matrix::Zero(dim_, dim_);
    case Kind::kDense:
      return dense_;
    case Kind::kConstantDense:
      return *shared_;
    case Kind::kRankOne: {
      Matrix out = c_ * v_ * v_.transpose();
      if (base_scale_ > 0.0) out += base_scale_ * *shared_;
      return out;
    }
  }
  return Matrix::Zero(dim_, dim_);
}

// ---------------------------------------------------------------------------

namespace {

Vector cholesky_solve(const Matrix& H, const NormPair& np, double lambda, const Vector& g) {
  Matrix system = H;
  system += lambda * np.B();
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() == Eigen::Success) {
    Vector d = llt.solve(g);
    if (d.allFinite()) return d;
  }
  const double jitter = 1e-12 * std::abs(system.trace());
  system.diagonal().array() += jitter;
  llt.compute(system);
  if (llt.info() != Eigen::Success) {
    throw LinalgError("solve_regularized: H + lambda*B is not positive definite (lambda=" +
                      std::to_string(lambda) + ")");
  }
  Vector d = llt.solve(g);
  if (!d.allFinite()) throw LinalgError("solve_regularized: non-finite solution");
  return d;
}

}  // namespace

Vector solve_regularized(const PsdOperator& H, const NormPair& np, double lambda, const Vector& g) {
  if (!(lambda > 0.0)) throw DomainError("solve_regularized: lambda must be positive");
  require_dim(H.dim(), np.dim(), "solve_regularized (operator)");
  require_dim(g.size(), np.dim(), "solve_regularized (rhs)");
  switch (H.kind()) {
    case PsdOperator::Kind::kZero:
      return np.solve(g) / lambda;
    case PsdOperator::Kind::kRankOne:
      // c v v^T + s B + lambda B = c v v^T + (s + lambda) B.
      return solve_rank_one_regularized(H.coefficient(), H.vector(), lambda + H.base_scale(), np, g);
    case PsdOperator::Kind::kDense:
    case PsdOperator::Kind::kConstantDense:
      return cholesky_solve(H.matrix(), np, lambda, g);
  }
  return {};
}

Vector solve_rank_one_regularized(double c, const Vector& v, double lambda, const NormPair& np,
                                  const Vector& g) {
  if (!(lambda > 0.0)) throw DomainError("solve_rank_one_regularized: lambda must be positive");
  if (c < 0.0) throw DomainError("solve_rank_one_regularized: c must be nonnegative");
  require_dim(v.size(), np.dim(), "solve_rank_one_regularized (v)");
  require_dim(g.size(), np.dim(), "solve_rank_one_regularized (g)");
  const Vector binv_g = np.solve(g);
  if (c == 0.0) return binv_g / lambda;
  const Vector binv_v = np.solve(v);
  const double denom = 1.0 + (c / lambda) * v.dot(binv_v);
  const double coef = (c / (lambda * lambda)) * v.dot(binv_g) / denom;
  return binv_g / lambda - coef * binv_v;
}

double power_iteration_norm(const Matrix& sym, int max_steps, double tol) {
  const Index n = sym.rows();
  if (n == 0) return 0.0;
  if (sym.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i));
  v.normalize();
  double estimate = 0.0;
  for (int step = 0; step < max_steps; ++step) {
    Vector w = sym * v;
    const double next = w.norm();
    if (next == 0.0) return estimate;
    v = w / next;
    if (std::abs(next - estimate) <= tol * next) return next;
    estimate = next;
  }
  return estimate;
}

}  // namespace grn
