#include "grn/hessian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grn {

namespace {

StructuralData require_structure(const Oracle& oracle, const Vector& x, const char* what) {
  auto sd = oracle.structure(x);
  if (!sd) throw DomainError(std::string(what) + ": oracle '" + oracle.name() + "' exposes no structure");
  return *sd;
}

struct PowerTerms {
  double r = 0.0;  // ||u||_G
  double p = 2.0;
  Vector w;        // J^T G u
  Matrix JtGJ;
};

PowerTerms power_terms(const Oracle& oracle, const Vector& x, const char* what) {
  const StructuralData sd = require_structure(oracle, x, what);
  if (!sd.power_p) throw DomainError(std::string(what) + ": oracle is not a power-residual objective");
  PowerTerms t;
  t.p = *sd.power_p;
  const Vector Gu = sd.metric_G ? Vector(*sd.metric_G * sd.residuals) : sd.residuals;
  t.r = std::sqrt(std::max(0.0, sd.residuals.dot(Gu)));
  t.w = sd.jacobian.transpose() * Gu;
  t.JtGJ = sd.metric_G ? Matrix(sd.jacobian.transpose() * *sd.metric_G * sd.jacobian)
                       : Matrix(sd.jacobian.transpose() * sd.jacobian);
  return t;
}

}  // namespace

PsdOperator exact_hessian(const Oracle& oracle, const Vector& x) {
  if (!oracle.has_hessian()) {
    throw DomainError("exact_hessian: oracle '" + oracle.name() + "' provides no Hessian");
  }
  return PsdOperator::dense(oracle.hessian(x));
}

PsdOperator zero_strategy(Index n) { return PsdOperator::zero(n); }

PsdOperator fisher_strategy(const Oracle& oracle, const Vector& x) {
  const StructuralData sd = require_structure(oracle, x, "fisher_strategy");
  if (!sd.per_term_gradients) {
    throw DomainError("fisher_strategy: oracle '" + oracle.name() + "' has no per-term gradients");
  }
  const Matrix& G = *sd.per_term_gradients;
  return PsdOperator::dense(G.transpose() * G);
}

PsdOperator gauss_newton_constant(const Dataset& data) {
  require_nonempty(data, "gauss_newton_constant");
  return PsdOperator::constant_dense(std::make_shared<const Matrix>(data.A.transpose() * data.A));
}

PsdOperator weighted_gauss_newton(const Oracle& oracle, const Vector& x) {
  const StructuralData sd = require_structure(oracle, x, "weighted_gauss_newton");
  if (!sd.softmax || !sd.smoothing_mu) {
    throw DomainError("weighted_gauss_newton: oracle '" + oracle.name() + "' is not a LogSumExp objective");
  }
  const Matrix& A = sd.jacobian;
  Matrix H = A.transpose() * sd.softmax->asDiagonal() * A;
  H /= *sd.smoothing_mu;
  return PsdOperator::dense(std::move(H));
}

PsdOperator nonlinear_power_full(const Oracle& oracle, const Vector& x) {
  const PowerTerms t = power_terms(oracle, x, "nonlinear_power_full");
  if (t.r == 0.0) {
    // p = 2 has a well-defined limit J^T G J; p > 2 degenerates to zero.
    if (t.p == 2.0) return PsdOperator::dense(t.JtGJ);
    return PsdOperator::zero(x.size()).mark_degenerate();
  }
  Matrix H = std::pow(t.r, t.p - 2.0) * t.JtGJ;
  if (t.p > 2.0) H += (t.p - 2.0) * std::pow(t.r, t.p - 4.0) * (t.w * t.w.transpose());
  return PsdOperator::dense(std::move(H));
}

PsdOperator fisher_rank_one(const Oracle& oracle, const Vector& x) {
  const PowerTerms t = power_terms(oracle, x, "fisher_rank_one");
  if (t.p == 2.0) return PsdOperator::zero(x.size());
  if (t.r == 0.0) throw DomainError("fisher_rank_one: u(x) = 0 with p > 2");
  // c grad f grad f^T with grad f = r^{p-2} w and c = (p-2)/r^p, folded into
  // (p-2) r^{p-4} w w^T to avoid under/overflow of the separate factors.
  return PsdOperator::rank_one((t.p - 2.0) * std::pow(t.r, t.p - 4.0), t.w);
}

// ---------------------------------------------------------------------------

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kExact: return "exact";
    case StrategyKind::kZero: return "zero";
    case StrategyKind::kFisher: return "fisher";
    case StrategyKind::kGaussNewtonConstant: return "gauss_newton_constant";
    case StrategyKind::kWeightedGaussNewton: return "weighted_gauss_newton";
    case StrategyKind::kNonlinearPowerFull: return "nonlinear_power_full";
    case StrategyKind::kNonlinearPowerFisherRankOne: return "nonlinear_power_fisher_rank_one";
  }
  return "unknown";
}

StrategyKind strategy_kind_from_string(const std::string& name) {
  for (auto kind : {StrategyKind::kExact, StrategyKind::kZero, StrategyKind::kFisher,
                    StrategyKind::kGaussNewtonConstant, StrategyKind::kWeightedGaussNewton,
                    StrategyKind::kNonlinearPowerFull, StrategyKind::kNonlinearPowerFisherRankOne}) {
    if (to_string(kind) == name) return kind;
  }
  if (name == "fisher_rank_one") return StrategyKind::kNonlinearPowerFisherRankOne;
  throw DomainError("unknown Hessian strategy '" + name + "'");
}

HessianStrategy HessianStrategy::gauss_newton_constant(const Dataset& data) {
  require_nonempty(data, "gauss_newton_constant");
  return gauss_newton_constant(Matrix(data.A.transpose() * data.A));
}

HessianStrategy HessianStrategy::gauss_newton_constant(Matrix gram) {
  HessianStrategy s(StrategyKind::kGaussNewtonConstant);
  s.gram_ = std::make_shared<const Matrix>(std::move(gram));
  return s;
}

PsdOperator HessianStrategy::evaluate(const Oracle& oracle, const Vector& x) const {
  switch (kind_) {
    case StrategyKind::kExact: return grn::exact_hessian(oracle, x);
    case StrategyKind::kZero: return grn::zero_strategy(x.size());
    case StrategyKind::kFisher: return grn::fisher_strategy(oracle, x);
    case StrategyKind::kGaussNewtonConstant:
      if (!gram_) throw DomainError("gauss_newton_constant strategy has no matrix");
      return PsdOperator::constant_dense(gram_);
    case StrategyKind::kWeightedGaussNewton: return grn::weighted_gauss_newton(oracle, x);
    case StrategyKind::kNonlinearPowerFull: return grn::nonlinear_power_full(oracle, x);
    case StrategyKind::kNonlinearPowerFisherRankOne: return grn::fisher_rank_one(oracle, x);
  }
  throw DomainError("unknown strategy");
}

// ---------------------------------------------------------------------------

double InexactnessBound::evaluate(double grad_dual_norm) const {
  return C1 + C2 * std::pow(grad_dual_norm, 1.0 - beta);
}

InexactnessBound fit_inexactness(const std::vector<double>& residuals,
                                 const std::vector<double>& grad_norms, double beta) {
  if (residuals.size() != grad_norms.size()) throw DomainError("fit_inexactness: size mismatch");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("fit_inexactness: beta must lie in [0,1]");
  InexactnessBound best{0.0, 0.0, beta};
  if (residuals.empty()) return best;

  const std::size_t m = residuals.size();
  std::vector<double> s(m);
  for (std::size_t i = 0; i < m; ++i) s[i] = std::pow(grad_norms[i], 1.0 - beta);

  const double e_max = *std::max_element(residuals.begin(), residuals.end());
  auto slack = [&](double c1, double c2) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double gap = c1 + c2 * s[i] - residuals[i];
      if (gap < -1e-12 * std::max(1.0, residuals[i])) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, gap);
    }
    return worst;
  };

  double best_slack = std::numeric_limits<double>::infinity();
  auto consider = [&](double c1, double c2) {
    if (!(c1 >= 0.0 && c2 >= 0.0) || !std::isfinite(c1) || !std::isfinite(c2)) return;
    const double value = slack(c1, c2);
    if (value < best_slack || (value == best_slack && c1 + c2 < best.C1 + best.C2)) {
      best_slack = value;
      best = {c1, c2, beta};
    }
  };

  consider(e_max, 0.0);
  double ratio = 0.0;
  bool any_positive = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (s[i] > 0.0) {
      ratio = std::max(ratio, residuals[i] / s[i]);
      any_positive = true;
    }
  }
  if (any_positive) consider(0.0, ratio);
  // Vertices of the feasible polygon lie on lines through pairs of samples.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (s[i] == s[j]) continue;
      const double c2 = (residuals[j] - residuals[i]) / (s[j] - s[i]);
      consider(residuals[i] - c2 * s[i], c2);
    }
  }
  return best;
}

InexactnessReport measure_inexactness(const Oracle& oracle, const HessianStrategy& strategy,
                                      const std::vector<Vector>& points, const NormPair& np,
                                      double beta, const Majorant& majorant) {
  if (!oracle.has_hessian()) {
    throw DomainError("measure_inexactness: oracle '" + oracle.name() + "' provides no Hessian");
  }
  InexactnessReport report;
  for (const Vector& x : points) {
    const Matrix diff = oracle.hessian(x) - strategy.evaluate(oracle, x).to_dense();
    Matrix white = np.whiten(diff);
    white = 0.5 * (white + white.transpose()).eval();
    report.residuals.push_back(power_iteration_norm(white));
    report.grad_norms.push_back(np.dual_norm(oracle.gradient(x)));
    if (majorant) report.majorant.push_back(majorant(x));
  }
  report.bound = fit_inexactness(report.residuals, report.grad_norms, beta);

  // Log-log slope over points where both quantities are positive.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < report.residuals.size(); ++i) {
    if (report.residuals[i] > 0.0 && report.grad_norms[i] > 0.0) {
      const double lx = std::log(report.grad_norms[i]);
      const double ly = std::log(report.residuals[i]);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
      ++count;
    }
  }
  const double denom = count * sxx - sx * sx;
  report.fitted_exponent = (count >= 2 && denom > 0.0) ? (count * sxy - sx * sy) / denom
                                                       : std::numeric_limits<double>::quiet_NaN();

  if (majorant) {
    bool ok = true;
    for (std::size_t i = 0; i < report.residuals.size(); ++i) {
      ok = ok && report.residuals[i] <= report.majorant[i] * (1.0 + 1e-10) + 1e-12;
    }
    report.majorized = ok;
  }
  return report;
}

}  // namespace grn
