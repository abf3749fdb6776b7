#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grn/dataset.hpp"
#include "grn/linalg.hpp"
#include "grn/objectives.hpp"

namespace grn {

// Individual approximations H(x). Each returns a PSD operator (the exact
// Hessian excepted, which is passed through even when indefinite).

PsdOperator exact_hessian(const Oracle& oracle, const Vector& x);
PsdOperator zero_strategy(Index n);
/// sum_i grad f_i grad f_i^T from the oracle's per-term gradients.
PsdOperator fisher_strategy(const Oracle& oracle, const Vector& x);
/// Constant A^T A.
PsdOperator gauss_newton_constant(const Dataset& data);
/// (1/mu) A^T Diag(softmax) A for a LogSumExp oracle.
PsdOperator weighted_gauss_newton(const Oracle& oracle, const Vector& x);
/// ||u||^{p-2} J^T G J + ((p-2)/||u||^p) grad f grad f^T for a power-residual oracle.
PsdOperator nonlinear_power_full(const Oracle& oracle, const Vector& x);
/// ((p-2)/||u||^p) grad f grad f^T as a rank-one operator (zero for p = 2).
PsdOperator fisher_rank_one(const Oracle& oracle, const Vector& x);

enum class StrategyKind {
  kExact,
  kZero,
  kFisher,
  kGaussNewtonConstant,
  kWeightedGaussNewton,
  kNonlinearPowerFull,
  kNonlinearPowerFisherRankOne,
};

std::string to_string(StrategyKind kind);
StrategyKind strategy_kind_from_string(const std::string& name);

/// A rule producing H(x) at any point. Cheap to copy; the constant
/// Gauss-Newton matrix is shared.
class HessianStrategy {
 public:
  HessianStrategy() = default;

  static HessianStrategy exact() { return HessianStrategy(StrategyKind::kExact); }
  static HessianStrategy zero() { return HessianStrategy(StrategyKind::kZero); }
  static HessianStrategy fisher() { return HessianStrategy(StrategyKind::kFisher); }
  static HessianStrategy gauss_newton_constant(const Dataset& data);
  static HessianStrategy gauss_newton_constant(Matrix gram);
  static HessianStrategy weighted_gauss_newton() {
    return HessianStrategy(StrategyKind::kWeightedGaussNewton);
  }
  static HessianStrategy nonlinear_power_full() {
    return HessianStrategy(StrategyKind::kNonlinearPowerFull);
  }
  static HessianStrategy fisher_rank_one() {
    return HessianStrategy(StrategyKind::kNonlinearPowerFisherRankOne);
  }

  StrategyKind kind() const { return kind_; }
  std::string name() const { return to_string(kind_); }

  PsdOperator evaluate(const Oracle& oracle, const Vector& x) const;

 private:
  explicit HessianStrategy(StrategyKind kind) : kind_(kind) {}

  StrategyKind kind_ = StrategyKind::kZero;
  std::shared_ptr<const Matrix> gram_;
};

/// ||Hess f(x) - H(x)||_* <= C1 + C2 ||grad f(x)||_*^{1-beta}.
struct InexactnessBound {
  double C1 = 0.0;
  double C2 = 0.0;
  double beta = 0.0;

  double evaluate(double grad_dual_norm) const;
};

struct InexactnessReport {
  InexactnessBound bound;          // tightest minimax envelope for the requested beta
  std::vector<double> residuals;   // e(x_i), spectral norm in the B-geometry
  std::vector<double> grad_norms;  // ||grad f(x_i)||_*
  /// Least-squares slope of log e against log ||grad f||_* over points with
  /// both positive; e ~ g^s means 1 - beta = s. NaN when fewer than 2 points qualify.
  double fitted_exponent = 0.0;
  std::vector<double> majorant;    // user-supplied bound at each point (if given)
  std::optional<bool> majorized;   // every residual below its majorant
};

using Majorant = std::function<double(const Vector& x)>;

/// Measures e(x) = ||B^{-1/2}(Hess f - H) B^{-1/2}|| (power iteration) at each
/// point and fits the smallest (C1, C2) for the given beta by one-sided minimax.
InexactnessReport measure_inexactness(const Oracle& oracle, const HessianStrategy& strategy,
                                      const std::vector<Vector>& points, const NormPair& np,
                                      double beta = 0.0, const Majorant& majorant = {});

/// Fits min over (C1, C2) >= 0 of max_i (C1 + C2 s_i - e_i) subject to
/// C1 + C2 s_i >= e_i for all i, with s_i = g_i^{1-beta}.
InexactnessBound fit_inexactness(const std::vector<double>& residuals,
                                 const std::vector<double>& grad_norms, double beta);

}  // namespace grn
