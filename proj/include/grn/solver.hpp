#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "grn/gns.hpp"
#include "grn/hessian.hpp"
#include "grn/linalg.hpp"
#include "grn/objectives.hpp"

namespace grn {

// Step-size rules --------------------------------------------------------------

struct FixedGamma {
  double gamma = 1.0;
};

/// gamma_k = pi(||grad f(x_k)||_*) from a closed-form bound.
struct TheoreticalGamma {
  GammaBoundSpec spec;
};

/// gamma_k = estimate_gamma(x_k, grad f(x_k)). Expensive; small n only.
struct EmpiricalGamma {
  EstimatorConfig estimator;
};

/// Halve gamma until the progress condition holds, then double for the next iteration.
struct AdaptiveFuncSearch {
  double gamma0 = 1.0;
};

/// Comparison search: double M until
///   <grad f(x+), x - x+> >= ||grad f(x+)||_*^2 / (4 M ||grad f(x)||_*^l),
/// then halve M for the next iteration.
struct AdaptiveGradSearch {
  enum class Gamma {
    kInverse,   // gamma = 1 / M
    kGradient,  // gamma = ||grad f(x)||_* / M
  };
  double l = 1.0;
  double M0 = 1.0;
  Gamma mode = Gamma::kInverse;
};

using GammaRule =
    std::variant<FixedGamma, TheoreticalGamma, EmpiricalGamma, AdaptiveFuncSearch, AdaptiveGradSearch>;

struct StopCriteria {
  double grad_tol = 1e-8;                       // stop when ||grad f||_* <= grad_tol
  std::optional<double> f_tol;                  // stop when f <= f_tol
  int max_iters = 1000;
  std::optional<std::int64_t> max_oracle_calls;
};

struct SolverConfig {
  GammaRule gamma_rule = AdaptiveFuncSearch{};
  HessianStrategy strategy = HessianStrategy::exact();
  std::optional<NormPair> norm;  // identity when unset
  StopCriteria stop;
  std::uint64_t seed = 0;
  int max_backtracks = 60;
  bool record_iterates = false;  // keep x_k in SolverResult::iterates
};

/// One row per iterate. Row 0 describes x_0 (gamma, backtracks and step are 0).
struct StepTrace {
  int k = 0;
  double f = 0.0;
  double grad_dual_norm = 0.0;
  double gamma = 0.0;               // gamma used for the step that produced x_k
  int backtracks = 0;
  double step_primal_norm = 0.0;
  std::int64_t oracle_calls_cum = 0;  // trial evaluations, x_0 excluded
  double wall_seconds = 0.0;
  bool accepted = true;             // progress condition held for this step
};

enum class SolverStatus { kConverged, kMaxIters, kStalled, kFailedLinalg };

std::string to_string(SolverStatus status);
SolverStatus solver_status_from_string(const std::string& name);

struct SolverResult {
  std::vector<StepTrace> trace;
  SolverStatus status = SolverStatus::kMaxIters;
  Vector x;             // last accepted iterate
  std::string message;  // populated on failure
  std::vector<Vector> iterates;  // x_0..x_K when record_iterates is set

  // Bookkeeping for the adaptive searches.
  double gamma0 = 0.0;            // initial gamma (func search) or M0 (grad search)
  int next_exponent = 0;          // next trial = gamma0 * 2^next_exponent (M0 * 2^.. for grad search)
  int capped_iterations = 0;      // iterations where the GAMMA_MAX cap absorbed the doubling

  int iterations() const { return trace.empty() ? 0 : static_cast<int>(trace.size()) - 1; }
  std::int64_t oracle_calls() const { return trace.empty() ? 0 : trace.back().oracle_calls_cum; }
};

/// x+ = x - (H(x) + (||grad f(x)||_* / gamma) B)^{-1} grad f(x).
struct StepResult {
  Vector x_next;
  Vector step;  // x - x_next
};

StepResult take_step(const Oracle& oracle, const HessianStrategy& strategy, const Vector& x,
                     double gamma, const NormPair& np);
/// Same, reusing an already evaluated gradient and H(x).
StepResult take_step(const PsdOperator& H, const Vector& x, const Vector& grad, double gamma,
                     const NormPair& np);

/// f_k - f_next >= (gamma/8) g_next^2 / g_k - 1e-12 (1 + |f_k|).
bool check_progress(double f_k, double f_next, double g_k_dual, double g_next_dual, double gamma);

struct AdaptiveStep {
  Vector x_next;
  double f_next = 0.0;
  Vector grad_next;
  double gamma_used = 0.0;
  int backtracks = 0;
  double step_primal_norm = 0.0;
  bool stalled = false;  // max_backtracks exceeded; x_next is x
};

/// One iteration of the adaptive function-value search starting from gamma_prev.
/// Each trial costs one oracle call (value and gradient at the trial point).
AdaptiveStep adaptive_step(const Oracle& oracle, const HessianStrategy& strategy, const Vector& x,
                           double gamma_prev, const NormPair& np, int max_backtracks = 60);

struct GradSearchStep {
  Vector x_next;
  double f_next = 0.0;
  Vector grad_next;
  double M_used = 0.0;
  double gamma_used = 0.0;
  int doublings = 0;
  double step_primal_norm = 0.0;
  bool stalled = false;
};

GradSearchStep adaptive_step_grad_search(const Oracle& oracle, const HessianStrategy& strategy,
                                         const Vector& x, double M_prev, const AdaptiveGradSearch& rule,
                                         const NormPair& np, int max_doublings = 60);

SolverResult run(const Oracle& oracle, const SolverConfig& cfg, const Vector& x0);

/// Checks the telescoped oracle count of an adaptive run:
///   N_K = 2K + log2(gamma_0 / gamma_K) - capped   (func search)
///   N_K = 2K + log2(M_K / M_0) - capped           (grad search)
/// with gamma_K / M_K the starting trial of the (unperformed) next iteration.
bool oracle_accounting_holds(const SolverResult& result, const GammaRule& rule);

}  // namespace grn
