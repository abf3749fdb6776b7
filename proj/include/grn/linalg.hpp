#pragma once

#include <memory>

#include "grn/types.hpp"

namespace grn {

/// Fixed preconditioner B (symmetric positive definite) together with its
/// Cholesky factor. Defines the primal norm ||h|| = <Bh, h>^{1/2} and the
/// dual norm ||s||_* = <s, B^{-1} s>^{1/2}. Immutable after construction.
class NormPair {
 public:
  /// Throws DomainError if B is not symmetric (relative 1e-12) or not positive definite.
  explicit NormPair(Matrix B);

  static NormPair identity(Index n);

  Index dim() const { return B_.rows(); }
  const Matrix& B() const { return B_; }
  bool is_identity() const { return identity_; }

  double primal_norm(const Vector& v) const;
  double dual_norm(const Vector& s) const;

  /// B^{-1} s via two triangular solves.
  Vector solve(const Vector& s) const;
  /// L^{-1} M L^{-T} with B = L L^T; spectral norms in the B-geometry.
  Matrix whiten(const Matrix& M) const;

 private:
  Matrix B_;
  Matrix L_;
  bool identity_ = false;
};

inline double primal_norm(const Vector& v, const NormPair& np) { return np.primal_norm(v); }
inline double dual_norm(const Vector& s, const NormPair& np) { return np.dual_norm(s); }

/// Positive-semidefinite linear operator H(x) produced by a Hessian strategy.
///
/// The rank-one kind represents c * v v^T + s * B, where B is the base matrix
/// the operator was built against (null when s == 0); it is solved through
/// Sherman-Morrison instead of a dense factorization.
class PsdOperator {
 public:
  enum class Kind { kZero, kDense, kConstantDense, kRankOne };

  static PsdOperator zero(Index n);
  static PsdOperator dense(Matrix m);
  static PsdOperator constant_dense(std::shared_ptr<const Matrix> m);
  static PsdOperator rank_one(double c, Vector v, double base_scale = 0.0,
                              std::shared_ptr<const Matrix> base = nullptr);

  Kind kind() const { return kind_; }
  Index dim() const { return dim_; }

  Vector apply(const Vector& h) const;
  Matrix to_dense() const;

  /// Only meaningful for kDense / kConstantDense.
  const Matrix& matrix() const;
  double coefficient() const { return c_; }
  const Vector& vector() const { return v_; }
  double base_scale() const { return base_scale_; }

  /// Set by strategies that hit a singular point (e.g. u(x) = 0); the operator is then zero.
  bool degenerate() const { return degenerate_; }
  PsdOperator& mark_degenerate() {
    degenerate_ = true;
    return *this;
  }

 private:
  Kind kind_ = Kind::kZero;
  Index dim_ = 0;
  Matrix dense_;
  std::shared_ptr<const Matrix> shared_;
  double c_ = 0.0;
  Vector v_;
  double base_scale_ = 0.0;
  bool degenerate_ = false;
};

/// Solves (H + lambda B) d = g. Dense operators go through Cholesky; on failure
/// one retry with 1e-12 * trace added to the diagonal, then LinalgError.
Vector solve_regularized(const PsdOperator& H, const NormPair& np, double lambda, const Vector& g);

/// Sherman-Morrison solve of (c v v^T + lambda B) d = g.
Vector solve_rank_one_regularized(double c, const Vector& v, double lambda, const NormPair& np,
                                  const Vector& g);

/// Largest-magnitude eigenvalue of a symmetric matrix by power iteration.
double power_iteration_norm(const Matrix& sym, int max_steps = 50, double tol = 1e-8);

}  // namespace grn
