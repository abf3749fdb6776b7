#include "grn/gns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace grn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be nonnegative and finite");
}

}  // namespace

LocalRegionQuery make_region_query(const Oracle& oracle, const Vector& x, const Vector& g) {
  require_dim(g.size(), x.size(), "make_region_query");
  auto hess = std::make_shared<const Matrix>(oracle.hessian(x));
  return {x, g, [hess](const Vector& h) { return h.dot(*hess * h); }};
}

bool in_local_region(const LocalRegionQuery& q, const Vector& h) {
  require_dim(h.size(), q.g.size(), "in_local_region");
  const double lhs = q.hessian_quadratic(h) + q.g.dot(h);
  return lhs <= 1e-12 * (1.0 + h.squaredNorm());
}

// ---------------------------------------------------------------------------

GammaEstimator::GammaEstimator(const Oracle& oracle, const HessianStrategy& strategy, Vector x,
                               Vector g, const NormPair& np, EstimatorConfig cfg)
    : oracle_(oracle), np_(np), cfg_(std::move(cfg)), x_(std::move(x)) {
  const Index n = x_.size();
  require_dim(n, oracle.dim(), "GammaEstimator: x");
  require_dim(g.size(), n, "GammaEstimator: g");
  require_dim(np_.dim(), n, "GammaEstimator: norm");
  g_dual_ = np_.dual_norm(g);
  if (!(g_dual_ > 0.0)) throw DomainError("estimate_gamma: direction g must be nonzero");
  if (cfg_.n_dirs < 0 || cfg_.n_radii < 1 || cfg_.grid_points < 1 || !(cfg_.tol > 0.0)) {
    throw DomainError("estimate_gamma: invalid estimator configuration");
  }

  grad_ = oracle.gradient(x_);
  ++evaluations_;
  H_ = strategy.evaluate(oracle, x_);
  // The region is shaped by the true Hessian; fall back to H when none is available.
  const Matrix hess = oracle.has_hessian() ? oracle.hessian(x_) : H_.to_dense();

  std::vector<Vector> dirs;
  if (n == 1) {
    dirs.push_back(Vector::Ones(1));
  } else {
    std::mt19937_64 rng(cfg_.seed);
    std::normal_distribution<double> normal;
    for (int i = 0; i < cfg_.n_dirs; ++i) {
      Vector d(n);
      for (Index j = 0; j < n; ++j) d[j] = normal(rng);
      dirs.push_back(d);
    }
    if (cfg_.step_direction) {
      require_dim(cfg_.step_direction->size(), n, "GammaEstimator: step direction");
      dirs.push_back(*cfg_.step_direction);
    }
    dirs.push_back(np_.solve(g));  // steepest
    Eigen::LDLT<Matrix> ldlt(hess);
    if (ldlt.info() == Eigen::Success) {
      const Vector newton = ldlt.solve(g);
      if (newton.allFinite()) dirs.push_back(newton);
    }
    try {
      dirs.push_back(solve_regularized(H_, np_, g_dual_, g));
    } catch (const LinalgError&) {
      // Direction only enriches the sample; skip it.
    }
  }

  for (const Vector& raw : dirs) {
    const double len = np_.primal_norm(raw);
    if (!(len > 0.0) || !std::isfinite(len)) continue;
    for (double sign : {1.0, -1.0}) {
      const Vector d = sign * raw / len;
      const double q = d.dot(hess * d);
      const double lin = g.dot(d);
      // Along h = r d the membership test reads q r^2 + lin r <= 0, i.e. q r <= -lin
      // (literal region) or q r <= |lin| (symmetric region).
      double r_min = 0.0;
      double r_max = kInf;
      if (cfg_.symmetric_region) {
        if (q > 0.0) r_max = std::abs(lin) / q;
      } else if (lin < 0.0) {
        if (q > 0.0) r_max = -lin / q;
      } else if (lin > 0.0) {
        if (q >= 0.0) continue;
        r_min = lin / -q;
      } else if (q > 0.0) {
        continue;
      }
      if (!(r_max > 0.0)) continue;
      rays_.push_back({d, r_min, r_max});
    }
  }
}

double GammaEstimator::ratio(const Vector& h) const {
  ++evaluations_;
  const Vector grad_h = oracle_.gradient(x_ + h);
  const Vector Hh = H_.apply(h);
  const Vector residual = grad_h - grad_ - Hh;
  double num = np_.dual_norm(residual);
  if (!std::isfinite(num)) return kInf;
  // Residuals at the level of floating-point cancellation are treated as zero.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                       (np_.dual_norm(grad_h) + np_.dual_norm(grad_) + np_.dual_norm(Hh));
  num = std::max(0.0, num - floor);
  const double r = g_dual_ * np_.primal_norm(h);
  return r > 0.0 ? num / r : 0.0;
}

double GammaEstimator::violation(double gamma) const {
  if (!(gamma > 0.0)) return 0.0;
  const int per_ray = x_.size() == 1 ? cfg_.grid_points : cfg_.n_radii;
  double worst = 0.0;
  for (const Ray& ray : rays_) {
    const double hi = std::min(ray.r_max, gamma);
    const double lo = ray.r_min;
    if (hi <= 0.0 || lo > hi) continue;
    std::vector<double> radii;
    radii.reserve(per_ray + 3);
    for (int j = 1; j <= per_ray; ++j) radii.push_back(lo + (hi - lo) * j / per_ray);
    if (lo > 0.0) {
      radii.push_back(lo);
    } else {
      radii.push_back(hi * 1e-3);
      radii.push_back(hi * 1e-6);
    }
    for (double r : radii) {
      if (!(r > 0.0)) continue;
      const double v = ratio(r * ray.dir);
      if (!std::isfinite(v)) return kInf;  // NaN or overflow counts as a violation
      worst = std::max(worst, v);
    }
  }
  return gamma * worst;
}

double GammaEstimator::estimate() const {
  if (violation(kGammaMax) <= 1.0) return kGammaMax;
  double lo = cfg_.gamma_lo.value_or(1e-8 * (1.0 + x_.norm()));
  if (!(lo > 0.0)) throw DomainError("estimate_gamma: gamma_lo must be positive");
  if (violation(lo) > 1.0) return lo;
  double hi = kGammaMax;
  while (hi > lo * (1.0 + cfg_.tol)) {
    const double mid = std::sqrt(lo * hi);
    if (violation(mid) <= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double estimate_gamma(const Oracle& oracle, const HessianStrategy& strategy, const Vector& x,
                      const Vector& g, const NormPair& np, const EstimatorConfig& cfg) {
  return GammaEstimator(oracle, strategy, x, g, np, cfg).estimate();
}

// ---------------------------------------------------------------------------

double gamma_bound_holder_hessian(double L, double nu, double gnorm) {
  require_positive(L, "L");
  require_positive(gnorm, "gnorm");
  if (!(nu >= 0.0 && nu <= 1.0)) throw DomainError("nu must lie in [0,1]");
  return std::pow((1.0 + nu) * gnorm / L, 1.0 / (1.0 + nu));
}

double gamma_bound_holder_third(double L3, double nu, double gnorm) {
  require_positive(L3, "L3");
  require_positive(gnorm, "gnorm");
  if (!(nu >= 0.0 && nu <= 1.0)) throw DomainError("nu must lie in [0,1]");
  return std::pow((1.0 + nu) * gnorm / (std::pow(2.0, 1.0 + nu) * L3), 1.0 / (2.0 + nu));
}

double gamma_bound_qsc(double M) {
  require_positive(M, "M");
  return 1.0 / M;
}

double gamma_bound_l0l1(double L0, double L1, double gnorm, double gradnorm_at_x) {
  require_nonnegative(L0, "L0");
  require_nonnegative(L1, "L1");
  require_positive(gnorm, "gnorm");
  require_positive(gradnorm_at_x, "gradnorm");
  if (L0 + L1 == 0.0) throw DomainError("L0 + L1 must be positive");
  return gnorm / (L0 + L1 * gradnorm_at_x) / (1.0 + std::exp(gnorm / gradnorm_at_x));
}

double gamma_bound_l0l1_at_gradient(double L0, double L1, double gnorm) {
  require_nonnegative(L0, "L0");
  require_nonnegative(L1, "L1");
  require_positive(gnorm, "gnorm");
  if (L0 + L1 == 0.0) throw DomainError("L0 + L1 must be positive");
  return gnorm / ((1.0 + std::exp(1.0)) * (L0 + L1 * gnorm));
}

double gamma_bound_m0m1(double M0, double M1, double gnorm, double gradnorm_at_x) {
  require_nonnegative(M0, "M0");
  require_nonnegative(M1, "M1");
  require_positive(gnorm, "gnorm");
  require_positive(gradnorm_at_x, "gradnorm");
  if (M0 + M1 == 0.0) throw DomainError("M0 + M1 must be positive");
  return std::sqrt(2.0 * gnorm / (M0 + M1 * gradnorm_at_x));
}

double gamma_bound_gen_sc(double Gq, double q, double gnorm) {
  require_positive(Gq, "Gq");
  require_positive(gnorm, "gnorm");
  if (!(q >= 0.0 && q < 2.0)) throw DomainError("q must lie in [0,2)");
  const double lead = std::pow(0.5, (8.0 + 2.0 * q) / ((2.0 - q) * (4.0 - q)));
  return lead * std::pow(std::pow(gnorm, 2.0 - q) / (Gq * Gq), 1.0 / (4.0 - q));
}

GenScParams pnorm_gen_sc_params(double p) {
  if (!(p > 2.0)) throw DomainError("pnorm_gen_sc_params: p must exceed 2");
  return {2.0 * (p - 3.0) / (p - 2.0), (p - 1.0) * (p - 2.0)};
}

// ---------------------------------------------------------------------------

void GammaBoundSpec::validate() const {
  if (terms.empty()) throw DomainError("GammaBoundSpec: no terms");
  bool any_positive = false;
  for (const auto& t : terms) {
    if (!(t.alpha >= 0.0 && t.alpha <= 1.0)) throw DomainError("GammaBoundSpec: alpha must lie in [0,1]");
    if (!(t.M >= 0.0) || !std::isfinite(t.M)) throw DomainError("GammaBoundSpec: M must be nonnegative");
    any_positive = any_positive || t.M > 0.0;
  }
  if (!any_positive) throw DomainError("GammaBoundSpec: some M must be positive");
}

double GammaBoundSpec::min_alpha() const {
  double a = kInf;
  for (const auto& t : terms) {
    if (t.M > 0.0) a = std::min(a, t.alpha);
  }
  return a;
}

double pi_bound(const GammaBoundSpec& spec, double gnorm) {
  spec.validate();
  require_positive(gnorm, "gnorm");
  double denom = 0.0;
  for (const auto& t : spec.terms) denom += t.M / std::pow(gnorm, t.alpha);
  return 1.0 / denom;
}

GammaBoundTerm gen_sc_term(double Gq, double q) {
  return {1.0 / gamma_bound_gen_sc(Gq, q, 1.0), (2.0 - q) / (4.0 - q)};
}

double combine_harmonic(const std::vector<double>& bounds) {
  double denom = 0.0;
  for (double b : bounds) {
    if (!(b >= 0.0)) throw DomainError("combine_harmonic: bounds must be nonnegative");
    if (b >= kGammaMax) continue;
    if (b == 0.0) return 0.0;
    denom += 1.0 / b;
  }
  return denom == 0.0 ? kGammaMax : 1.0 / denom;
}

double affine_transform_bound(double gamma, double A_norm) {
  require_positive(A_norm, "A_norm");
  if (!(gamma >= 0.0)) throw DomainError("affine_transform_bound: gamma must be nonnegative");
  return std::min(kGammaMax, gamma / A_norm);
}

}  // namespace grn
