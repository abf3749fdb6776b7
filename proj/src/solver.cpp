#include "grn/solver.hpp"

#include <chrono>
#include <cmath>

namespace grn {

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kConverged: return "converged";
    case SolverStatus::kMaxIters: return "max_iters";
    case SolverStatus::kStalled: return "stalled";
    case SolverStatus::kFailedLinalg: return "failed_linalg";
  }
  return "unknown";
}

SolverStatus solver_status_from_string(const std::string& name) {
  for (auto s : {SolverStatus::kConverged, SolverStatus::kMaxIters, SolverStatus::kStalled,
                 SolverStatus::kFailedLinalg}) {
    if (to_string(s) == name) return s;
  }
  throw DomainError("unknown solver status '" + name + "'");
}

StepResult take_step(const PsdOperator& H, const Vector& x, const Vector& grad, double gamma,
                     const NormPair& np) {
  require_dim(grad.size(), x.size(), "take_step: gradient");
  if (!(gamma > 0.0)) throw DomainError("take_step: gamma must be positive");
  const double gd = np.dual_norm(grad);
  if (!(gd > 0.0)) throw DomainError("take_step: zero gradient");
  Vector d = solve_regularized(H, np, gd / gamma, grad);
  Vector x_next = x - d;
  return {std::move(x_next), std::move(d)};
}

StepResult take_step(const Oracle& oracle, const HessianStrategy& strategy, const Vector& x,
                     double gamma, const NormPair& np) {
  return take_step(strategy.evaluate(oracle, x), x, oracle.gradient(x), gamma, np);
}

bool check_progress(double f_k, double f_next, double g_k_dual, double g_next_dual, double gamma) {
  if (!(g_k_dual > 0.0)) throw DomainError("check_progress: g_k must be positive");
  if (gamma == 0.0) return true;
  return f_k - f_next >= gamma / 8.0 * g_next_dual * g_next_dual / g_k_dual - 1e-12 * (1.0 + std::abs(f_k));
}

namespace {

struct Point {
  Vector x;
  double f = 0.0;
  Vector grad;
  double gd = 0.0;
};

AdaptiveStep adaptive_step_impl(const Oracle& oracle, const PsdOperator& H, const Point& p,
                                double gamma_prev, const NormPair& np, int max_backtracks) {
  AdaptiveStep out;
  for (int t = 0; t <= max_backtracks; ++t) {
    const double gamma = std::ldexp(gamma_prev, -t);
    const StepResult s = take_step(H, p.x, p.grad, gamma, np);
    const double f_next = oracle.value(s.x_next);
    Vector g_next = oracle.gradient(s.x_next);
    const double gd_next = np.dual_norm(g_next);
    out.backtracks = t;
    if (std::isfinite(f_next) && std::isfinite(gd_next) &&
        check_progress(p.f, f_next, p.gd, gd_next, gamma)) {
      out.x_next = s.x_next;
      out.f_next = f_next;
      out.grad_next = std::move(g_next);
      out.gamma_used = gamma;
      out.step_primal_norm = np.primal_norm(s.step);
      return out;
    }
  }
  out.stalled = true;
  out.x_next = p.x;
  out.f_next = p.f;
  out.grad_next = p.grad;
  return out;
}

double grad_search_gamma(const AdaptiveGradSearch& rule, double M, double gd) {
  return rule.mode == AdaptiveGradSearch::Gamma::kInverse ? 1.0 / M : gd / M;
}

GradSearchStep grad_search_impl(const Oracle& oracle, const PsdOperator& H, const Point& p,
                                double M_prev, const AdaptiveGradSearch& rule, const NormPair& np,
                                int max_doublings) {
  GradSearchStep out;
  for (int t = 0; t <= max_doublings; ++t) {
    const double M = std::ldexp(M_prev, t);
    const double gamma = grad_search_gamma(rule, M, p.gd);
    const StepResult s = take_step(H, p.x, p.grad, gamma, np);
    const double f_next = oracle.value(s.x_next);
    Vector g_next = oracle.gradient(s.x_next);
    const double gd_next = np.dual_norm(g_next);
    out.doublings = t;
    const double lhs = g_next.dot(s.step);
    const double rhs = gd_next * gd_next / (4.0 * M * std::pow(p.gd, rule.l));
    if (std::isfinite(f_next) && std::isfinite(gd_next) && lhs >= rhs) {
      out.x_next = s.x_next;
      out.f_next = f_next;
      out.grad_next = std::move(g_next);
      out.M_used = M;
      out.gamma_used = gamma;
      out.step_primal_norm = np.primal_norm(s.step);
      return out;
    }
  }
  out.stalled = true;
  out.x_next = p.x;
  out.f_next = p.f;
  out.grad_next = p.grad;
  return out;
}

Point evaluate_point(const Oracle& oracle, Vector x, const NormPair& np) {
  Point p;
  p.f = oracle.value(x);
  p.grad = oracle.gradient(x);
  p.gd = np.dual_norm(p.grad);
  p.x = std::move(x);
  return p;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

AdaptiveStep adaptive_step(const Oracle& oracle, const HessianStrategy& strategy, const Vector& x,
                           double gamma_prev, const NormPair& np, int max_backtracks) {
  if (!(gamma_prev > 0.0)) throw DomainError("adaptive_step: gamma must be positive");
  const Point p = evaluate_point(oracle, x, np);
  if (!(p.gd > 0.0)) throw DomainError("adaptive_step: zero gradient");
  return adaptive_step_impl(oracle, strategy.evaluate(oracle, x), p, gamma_prev, np, max_backtracks);
}

GradSearchStep adaptive_step_grad_search(const Oracle& oracle, const HessianStrategy& strategy,
                                         const Vector& x, double M_prev, const AdaptiveGradSearch& rule,
                                         const NormPair& np, int max_doublings) {
  if (!(M_prev > 0.0)) throw DomainError("adaptive_step_grad_search: M must be positive");
  if (!(rule.l >= 2.0 / 3.0 - 1e-12 && rule.l <= 1.0)) {
    throw DomainError("adaptive_step_grad_search: l must lie in [2/3, 1]");
  }
  const Point p = evaluate_point(oracle, x, np);
  if (!(p.gd > 0.0)) throw DomainError("adaptive_step_grad_search: zero gradient");
  return grad_search_impl(oracle, strategy.evaluate(oracle, x), p, M_prev, rule, np, max_doublings);
}

SolverResult run(const Oracle& oracle, const SolverConfig& cfg, const Vector& x0) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  const Index n = oracle.dim();
  require_dim(x0.size(), n, "run: x0");
  if (!x0.allFinite()) throw DomainError("run: x0 must be finite");
  const NormPair np = cfg.norm ? *cfg.norm : NormPair::identity(n);
  require_dim(np.dim(), n, "run: norm");
  if (cfg.max_backtracks < 0) throw DomainError("run: max_backtracks must be nonnegative");

  SolverResult result;
  Point p = evaluate_point(oracle, x0, np);
  result.x = p.x;
  if (cfg.record_iterates) result.iterates.push_back(p.x);
  result.trace.push_back({0, p.f, p.gd, 0.0, 0, 0.0, 0, elapsed(), true});
  if (!std::isfinite(p.f) || !std::isfinite(p.gd)) {
    result.status = SolverStatus::kStalled;
    result.message = "non-finite objective at x0";
    return result;
  }

  // Exponent bookkeeping for the adaptive searches; the cap acts on the exponent.
  int exponent = 0;
  int exponent_limit = 0;
  if (const auto* fs = std::get_if<AdaptiveFuncSearch>(&cfg.gamma_rule)) {
    if (!(fs->gamma0 > 0.0) || fs->gamma0 > kGammaMax) throw DomainError("run: gamma0 must lie in (0, GAMMA_MAX]");
    result.gamma0 = fs->gamma0;
    exponent_limit = static_cast<int>(std::floor(std::log2(kGammaMax / fs->gamma0)));
  } else if (const auto* gs = std::get_if<AdaptiveGradSearch>(&cfg.gamma_rule)) {
    if (!(gs->M0 > 0.0)) throw DomainError("run: M0 must be positive");
    if (!(gs->l >= 2.0 / 3.0 - 1e-12 && gs->l <= 1.0)) throw DomainError("run: l must lie in [2/3, 1]");
    result.gamma0 = gs->M0;
    // M is kept at or above 1/GAMMA_MAX.
    exponent_limit = static_cast<int>(std::ceil(std::log2(1.0 / (kGammaMax * gs->M0))));
  } else if (const auto* fg = std::get_if<FixedGamma>(&cfg.gamma_rule)) {
    if (!(fg->gamma > 0.0)) throw DomainError("run: fixed gamma must be positive");
  } else if (const auto* th = std::get_if<TheoreticalGamma>(&cfg.gamma_rule)) {
    th->spec.validate();
  }

  std::int64_t calls = 0;
  for (int k = 1;; ++k) {
    if (p.gd <= cfg.stop.grad_tol || (cfg.stop.f_tol && p.f <= *cfg.stop.f_tol)) {
      result.status = SolverStatus::kConverged;
      break;
    }
    if (k > cfg.stop.max_iters || (cfg.stop.max_oracle_calls && calls >= *cfg.stop.max_oracle_calls)) {
      result.status = SolverStatus::kMaxIters;
      break;
    }

    StepTrace row;
    row.k = k;
    Point next;
    bool stalled = false;
    try {
      const PsdOperator H = cfg.strategy.evaluate(oracle, p.x);
      auto plain_step = [&](double gamma) {
        const StepResult s = take_step(H, p.x, p.grad, gamma, np);
        next = evaluate_point(oracle, s.x_next, np);
        ++calls;
        row.gamma = gamma;
        row.step_primal_norm = np.primal_norm(s.step);
        row.accepted = p.gd > 0.0 && check_progress(p.f, next.f, p.gd, next.gd, gamma);
        stalled = !std::isfinite(next.f) || !std::isfinite(next.gd);
      };
      std::visit(
          Overloaded{
              [&](const FixedGamma& r) { plain_step(r.gamma); },
              [&](const TheoreticalGamma& r) { plain_step(std::min(kGammaMax, pi_bound(r.spec, p.gd))); },
              [&](const EmpiricalGamma& r) {
                EstimatorConfig ec = r.estimator;
                ec.seed = cfg.seed + static_cast<std::uint64_t>(k);
                plain_step(estimate_gamma(oracle, cfg.strategy, p.x, p.grad, np, ec));
              },
              [&](const AdaptiveFuncSearch& r) {
                const AdaptiveStep s = adaptive_step_impl(oracle, H, p, std::ldexp(r.gamma0, exponent), np,
                                                          cfg.max_backtracks);
                calls += s.backtracks + 1;
                if (s.stalled) {
                  stalled = true;
                  return;
                }
                next.x = s.x_next;
                next.f = s.f_next;
                next.grad = s.grad_next;
                next.gd = np.dual_norm(next.grad);
                row.gamma = s.gamma_used;
                row.backtracks = s.backtracks;
                row.step_primal_norm = s.step_primal_norm;
                row.accepted = true;
                const int proposed = exponent - s.backtracks + 1;
                if (proposed > exponent_limit) ++result.capped_iterations;
                exponent = std::min(proposed, exponent_limit);
              },
              [&](const AdaptiveGradSearch& r) {
                const GradSearchStep s = grad_search_impl(oracle, H, p, std::ldexp(r.M0, exponent), r, np,
                                                          cfg.max_backtracks);
                calls += s.doublings + 1;
                if (s.stalled) {
                  stalled = true;
                  return;
                }
                next.x = s.x_next;
                next.f = s.f_next;
                next.grad = s.grad_next;
                next.gd = np.dual_norm(next.grad);
                row.gamma = s.gamma_used;
                row.backtracks = s.doublings;
                row.step_primal_norm = s.step_primal_norm;
                row.accepted = check_progress(p.f, next.f, p.gd, next.gd, s.gamma_used);
                const int proposed = exponent + s.doublings - 1;
                if (proposed < exponent_limit) ++result.capped_iterations;
                exponent = std::max(proposed, exponent_limit);
              },
          },
          cfg.gamma_rule);
    } catch (const LinalgError& e) {
      result.status = SolverStatus::kFailedLinalg;
      result.message = e.what();
      break;
    }
    if (stalled) {
      result.status = SolverStatus::kStalled;
      result.message = "step search exhausted or non-finite objective at iteration " + std::to_string(k);
      break;
    }

    p = std::move(next);
    result.x = p.x;
    if (cfg.record_iterates) result.iterates.push_back(p.x);
    row.f = p.f;
    row.grad_dual_norm = p.gd;
    row.oracle_calls_cum = calls;
    row.wall_seconds = elapsed();
    result.trace.push_back(row);
  }
  result.next_exponent = exponent;
  return result;
}

bool oracle_accounting_holds(const SolverResult& result, const GammaRule& rule) {
  const auto K = static_cast<std::int64_t>(result.iterations());
  std::int64_t N = 0;
  for (std::size_t i = 1; i < result.trace.size(); ++i) N += 1 + result.trace[i].backtracks;
  if (N != result.oracle_calls()) return false;
  if (std::holds_alternative<AdaptiveFuncSearch>(rule)) {
    return N == 2 * K - result.next_exponent - result.capped_iterations;
  }
  if (std::holds_alternative<AdaptiveGradSearch>(rule)) {
    return N == 2 * K + result.next_exponent - result.capped_iterations;
  }
  return N == K;
}

}  // namespace grn
