#include "grn/theory.hpp"

#include <algorithm>
#include <cmath>

namespace grn {

namespace {

constexpr double kBranchCutoff = 1e-6;

void require_eps(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive");
}

void require_params(const ProblemClassParams& p) {
  p.spec.validate();
  if (!(p.D > 0.0) || !(p.F0 > 0.0) || !(p.grad0_dual > 0.0)) {
    throw DomainError("ProblemClassParams: D, F0 and grad0_dual must be positive");
  }
}

// (1/a)(eps^{-a} - F0^{-a}) without cancellation; tends to log(F0/eps) as a -> 0.
double power_gap_over_rate(double a, double epsilon, double F0) {
  return -std::pow(epsilon, -a) * std::expm1(a * std::log(epsilon / F0)) / a;
}

double log_term(double g0, double D, double epsilon) {
  return std::max(0.0, 2.0 * std::log(g0 * D / epsilon));
}

double convex_max_factor(const ProblemClassParams& p, double alpha, double epsilon) {
  double m = 0.0;
  for (const auto& t : p.spec.terms) {
    if (t.M == 0.0) continue;
    m = std::max(m, t.M * std::pow(p.D, t.alpha + 1.0) / std::pow(epsilon, t.alpha - alpha));
  }
  return m;
}

}  // namespace

GradientDominance uniformly_convex_dominance(double p, double sigma) {
  if (!(p >= 2.0) || !(sigma > 0.0)) throw DomainError("uniformly_convex_dominance: need p >= 2, sigma > 0");
  return {1.0 / (p - 1.0), (p - 1.0) / p * std::pow(1.0 / sigma, 1.0 / (p - 1.0))};
}

GammaBoundSpec augmented_spec(const GammaBoundSpec& spec, const std::optional<InexactnessBound>& inexactness) {
  GammaBoundSpec out = spec;
  if (inexactness) {
    if (inexactness->C1 < 0.0 || inexactness->C2 < 0.0) throw DomainError("inexactness constants must be nonnegative");
    if (inexactness->C1 > 0.0) out.terms.push_back({inexactness->C1, 1.0});
    if (inexactness->C2 > 0.0) out.terms.push_back({inexactness->C2, inexactness->beta});
  }
  return out;
}

double convex_complexity_term(const ProblemClassParams& params, double epsilon) {
  require_params(params);
  require_eps(epsilon);
  if (epsilon >= params.F0) return 0.0;
  const double alpha = params.spec.min_alpha();
  if (alpha < kBranchCutoff) {
    return static_cast<double>(params.spec.size()) * convex_max_factor(params, alpha, epsilon) *
           std::log(params.F0 / epsilon);
  }
  return convex_complexity_term_power(params, epsilon);
}

double convex_complexity_term_power(const ProblemClassParams& params, double epsilon) {
  require_params(params);
  require_eps(epsilon);
  if (epsilon >= params.F0) return 0.0;
  const double alpha = params.spec.min_alpha();
  if (!(alpha > 0.0)) throw DomainError("convex_complexity_term_power: alpha must be positive");
  return static_cast<double>(params.spec.size()) * convex_max_factor(params, alpha, epsilon) *
         power_gap_over_rate(alpha, epsilon, params.F0);
}

double grad_dominated_complexity_term(const ProblemClassParams& params, double epsilon) {
  require_params(params);
  require_eps(epsilon);
  const GradientDominance dom = params.dominance.value_or(GradientDominance{0.0, params.D});
  if (!(dom.c >= 0.0 && dom.c <= 1.0) || !(dom.Dc > 0.0)) {
    throw DomainError("gradient dominance needs c in [0,1] and D_c > 0");
  }
  const double alpha = params.spec.min_alpha();
  if (dom.c > alpha + 1e-15) {
    throw DomainError("gradient dominance degree c = " + std::to_string(dom.c) +
                      " exceeds alpha = " + std::to_string(alpha));
  }
  if (epsilon >= params.F0) return 0.0;
  const double eta = std::max(0.0, (alpha - dom.c) / (1.0 + dom.c));
  double m = 0.0;
  for (const auto& t : params.spec.terms) {
    if (t.M == 0.0) continue;
    const double inner = std::pow(dom.Dc, 1.0 + t.alpha) / std::pow(epsilon, t.alpha - alpha);
    m = std::max(m, t.M * std::pow(inner, 1.0 / (1.0 + dom.c)));
  }
  const double d = static_cast<double>(params.spec.size());
  if (eta < kBranchCutoff) return 8.0 * d * m * std::log(params.F0 / epsilon);
  return 8.0 * d * m * power_gap_over_rate(eta, epsilon, params.F0);
}

double k_nonconvex(const ProblemClassParams& params, double epsilon) {
  require_params(params);
  require_eps(epsilon);
  const GammaBoundSpec spec = augmented_spec(params.spec, params.inexactness);
  const double gamma_star = pi_bound(spec, epsilon);
  const double log_part = std::max(0.0, std::log(params.grad0_dual / epsilon));
  return std::ceil(8.0 * params.F0 / (gamma_star * epsilon) + log_part);
}

double k_convex(const ProblemClassParams& params, double epsilon) {
  return std::ceil(convex_complexity_term(params, epsilon) + log_term(params.grad0_dual, params.D, epsilon));
}

double k_grad_dominated(const ProblemClassParams& params, double epsilon) {
  return std::ceil(grad_dominated_complexity_term(params, epsilon) +
                   log_term(params.grad0_dual, params.D, epsilon));
}

double k_inexact_convex(const ProblemClassParams& params, double epsilon) {
  if (!params.inexactness) throw DomainError("k_inexact_convex: inexactness bound required");
  ProblemClassParams augmented = params;
  augmented.spec = augmented_spec(params.spec, params.inexactness);
  augmented.inexactness.reset();
  return k_grad_dominated(augmented, epsilon);
}

}  // namespace grn
