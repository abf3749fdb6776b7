#pragma once

#include <optional>

#include "grn/gns.hpp"
#include "grn/hessian.hpp"

namespace grn {

/// ||grad f(x)||_*^{1+c} D_c >= f(x) - f*.
struct GradientDominance {
  double c = 0.0;
  double Dc = 1.0;
};

/// Uniform convexity of degree p with modulus sigma: c = 1/(p-1), D_c = ((p-1)/p) sigma^{-1/(p-1)}.
GradientDominance uniformly_convex_dominance(double p, double sigma);

struct ProblemClassParams {
  GammaBoundSpec spec;
  double D = 1.0;           // sublevel-set diameter (primal norm)
  double F0 = 1.0;          // f(x0) - f*
  double grad0_dual = 1.0;  // ||grad f(x0)||_*
  std::optional<GradientDominance> dominance;
  std::optional<InexactnessBound> inexactness;
};

/// Unrounded complexity term C(eps) of the convex predictor (log limit for alpha < 1e-6).
double convex_complexity_term(const ProblemClassParams& params, double epsilon);
/// Same with the power formula forced (alpha must be positive); exposes branch continuity.
double convex_complexity_term_power(const ProblemClassParams& params, double epsilon);
/// Unrounded C(eps) of the gradient-dominated predictor (log limit for eta < 1e-6).
double grad_dominated_complexity_term(const ProblemClassParams& params, double epsilon);

/// ceil(8 F0 / (pi(eps) eps) + log(g0/eps)); inexactness adds 8 F0 (C1/eps^2 + C2/eps^{1+beta}).
double k_nonconvex(const ProblemClassParams& params, double epsilon);
/// ceil(C(eps) + 2 log(g0 D / eps)) with C(eps) = (d/alpha) max_i(M_i D^{1+alpha_i} / eps^{alpha_i-alpha})
/// (eps^{-alpha} - F0^{-alpha}). For eps >= F0 only the log term remains.
double k_convex(const ProblemClassParams& params, double epsilon);
/// ceil(C(eps) + 2 log(g0 D / eps)) with eta = (alpha - c)/(1 + c). Throws DomainError if c > alpha.
/// Without a dominance entry, c = 0 and D_c = D.
double k_grad_dominated(const ProblemClassParams& params, double epsilon);
/// Gradient-dominated predictor on the spec augmented with (C1, alpha = 1) and (C2, alpha = beta).
double k_inexact_convex(const ProblemClassParams& params, double epsilon);

/// Spec extended by the inexactness terms (unchanged when none or both zero).
GammaBoundSpec augmented_spec(const GammaBoundSpec& spec, const std::optional<InexactnessBound>& inexactness);

}  // namespace grn
