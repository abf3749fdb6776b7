#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "grn/hessian.hpp"
#include "grn/linalg.hpp"
#include "grn/objectives.hpp"

namespace grn {

// ---------------------------------------------------------------------------
// Local region O_{x,g} = { h : <Hess f(x) h, h> + <g, h> <= 0 }.

struct LocalRegionQuery {
  Vector x;
  Vector g;
  std::function<double(const Vector&)> hessian_quadratic;  // h -> <Hess f(x) h, h>
};

/// Builds the query from the oracle's exact Hessian at x.
LocalRegionQuery make_region_query(const Oracle& oracle, const Vector& x, const Vector& g);

/// True iff <Hess f(x) h, h> + <g, h> <= 1e-12 (1 + ||h||^2). Unbounded regions
/// (indefinite Hessians) are handled naturally.
bool in_local_region(const LocalRegionQuery& q, const Vector& h);

// ---------------------------------------------------------------------------
// Empirical Gradient-Normalized Smoothness.

struct EstimatorConfig {
  int n_dirs = 64;
  int n_radii = 16;
  int grid_points = 2048;  // per side, n = 1 only
  double tol = 1e-3;       // relative bisection tolerance
  std::optional<double> gamma_lo;  // default 1e-8 (1 + ||x||)
  /// Sample O_{x,g} ∪ O_{x,-g} = { h : <Hess h, h> <= |<g, h>| } instead of O_{x,g}.
  bool symmetric_region = true;
  std::uint64_t seed = 0;
  /// Extra direction to sample (e.g. the current method step).
  std::optional<Vector> step_direction;
};

/// Samples the local region once and answers viol(gamma) queries:
///   viol(gamma) = gamma * max_h ||grad f(x+h) - grad f(x) - H h||_* / (||g||_* ||h||)
/// over sampled h in the region with ||h|| <= gamma. gamma(x, g) is the
/// largest gamma with viol(gamma) <= 1.
class GammaEstimator {
 public:
  GammaEstimator(const Oracle& oracle, const HessianStrategy& strategy, Vector x, Vector g,
                 const NormPair& np, EstimatorConfig cfg = {});

  double violation(double gamma) const;
  /// Bisection on [gamma_lo, kGammaMax]; returns kGammaMax if no violation is found.
  double estimate() const;

  /// Number of oracle gradient evaluations issued so far.
  std::size_t evaluations() const { return evaluations_; }

 private:
  struct Ray {
    Vector dir;       // unit primal norm
    double r_min;     // feasible radii along the ray: [r_min, r_max]
    double r_max;
  };

  double ratio(const Vector& h) const;

  const Oracle& oracle_;
  NormPair np_;
  EstimatorConfig cfg_;
  Vector x_;
  Vector grad_;
  PsdOperator H_;
  double g_dual_ = 0.0;
  std::vector<Ray> rays_;
  mutable std::size_t evaluations_ = 0;
};

/// Convenience wrapper: GammaEstimator(...).estimate(). Throws DomainError when ||g||_* = 0.
double estimate_gamma(const Oracle& oracle, const HessianStrategy& strategy, const Vector& x,
                      const Vector& g, const NormPair& np, const EstimatorConfig& cfg = {});

// ---------------------------------------------------------------------------
// Closed-form lower bounds on gamma for standard problem classes.

/// Hessian Hölder of degree nu with constant L: ((1+nu) gnorm / L)^{1/(1+nu)}.
double gamma_bound_holder_hessian(double L, double nu, double gnorm);
/// Convex with Hölder third derivative: ((1+nu) gnorm / (2^{1+nu} L3))^{1/(2+nu)}.
double gamma_bound_holder_third(double L3, double nu, double gnorm);
/// Quasi-self-concordant with parameter M: 1/M.
double gamma_bound_qsc(double M);
/// (L0, L1)-smooth: gnorm / (L0 + L1 gradnorm) / (1 + exp(gnorm / gradnorm)).
double gamma_bound_l0l1(double L0, double L1, double gnorm, double gradnorm_at_x);
/// (L0, L1)-smooth with g = grad f(x): gnorm / ((1 + e)(L0 + L1 gnorm)).
double gamma_bound_l0l1_at_gradient(double L0, double L1, double gnorm);
/// Second-order (M0, M1)-smooth: (2 gnorm / (M0 + M1 gradnorm))^{1/2}.
double gamma_bound_m0m1(double M0, double M1, double gnorm, double gradnorm_at_x);
/// Generalized self-concordant of degree q in [0, 2) with constant Gq.
double gamma_bound_gen_sc(double Gq, double q, double gnorm);

/// Generalized self-concordance parameters of (1/p)||x||^p: q = 2(p-3)/(p-2), Gq = (p-1)(p-2).
struct GenScParams {
  double q;
  double Gq;
};
GenScParams pnorm_gen_sc_params(double p);

// ---------------------------------------------------------------------------
// Harmonic-mean structure pi(gnorm) = (sum_i M_i / gnorm^{alpha_i})^{-1}.

struct GammaBoundTerm {
  double M = 0.0;
  double alpha = 0.0;
};

struct GammaBoundSpec {
  std::vector<GammaBoundTerm> terms;

  /// Throws DomainError unless every alpha is in [0,1], every M >= 0 and some M > 0.
  void validate() const;
  double min_alpha() const;
  std::size_t size() const { return terms.size(); }
};

double pi_bound(const GammaBoundSpec& spec, double gnorm);

/// The generalized self-concordant bound written as a single term M / gnorm^alpha,
/// alpha = (2-q)/(4-q).
GammaBoundTerm gen_sc_term(double Gq, double q);

/// (sum_i 1/gamma_i)^{-1}; entries >= kGammaMax count as infinite.
double combine_harmonic(const std::vector<double>& bounds);

/// gamma_f(A x + b) / ||A||: lower bound for g(x) = f(Ax + b).
double affine_transform_bound(double gamma, double A_norm);

}  // namespace grn
