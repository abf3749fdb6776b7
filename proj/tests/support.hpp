#pragma once

// Independent oracles shared by the unit tests and the acceptance binary:
// finite differences, dense reference solves and small random instances.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "grn/dataset.hpp"
#include "grn/objectives.hpp"
#include "grn/types.hpp"

namespace grn::testing {

inline Vector random_vector(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline Matrix random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

inline Matrix random_spd(Index n, std::mt19937_64& rng, double shift = 0.5) {
  const Matrix M = random_matrix(n, n, rng);
  return M.transpose() * M + shift * Matrix::Identity(n, n);
}

/// Central-difference gradient of the objective value.
inline Vector fd_gradient(const Oracle& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] += step;
    xm[i] -= step;
    g[i] = (f.value(xp) - f.value(xm)) / (2.0 * step);
  }
  return g;
}

/// Central-difference Hessian from the analytic gradient, symmetrized.
inline Matrix fd_hessian(const Oracle& f, const Vector& x, double h = 1e-5) {
  const Index n = x.size();
  Matrix H(n, n);
  for (Index i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] += step;
    xm[i] -= step;
    H.col(i) = (f.gradient(xp) - f.gradient(xm)) / (2.0 * step);
  }
  return 0.5 * (H + H.transpose());
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

/// Dataset with i.i.d. U[-1,1] entries; more rows than columns keeps the
/// logistic / LogSumExp objectives bounded below with high probability.
inline Dataset tall_dataset(Index rows, Index cols, std::uint64_t seed) {
  return synthetic_dataset(rows, cols, seed);
}

struct NamedOracle {
  std::string name;
  OraclePtr oracle;
  double point_scale = 1.0;
};

/// Every objective family the library ships, at small sizes.
inline std::vector<NamedOracle> objective_zoo() {
  std::mt19937_64 rng(17);
  std::vector<NamedOracle> zoo;
  zoo.push_back({"logsumexp(mu=1)", logsumexp_oracle(tall_dataset(12, 5, 1), 1.0)});
  zoo.push_back({"logsumexp(mu=0.1)", logsumexp_oracle(tall_dataset(12, 5, 2), 0.1), 0.5});
  zoo.push_back({"logistic", logistic_oracle(tall_dataset(15, 4, 3))});
  for (double p : {2.0, 3.0, 4.0}) {
    zoo.push_back({"linear-residual p=" + std::to_string(p),
                   power_residual_oracle(linear_residuals(tall_dataset(8, 4, 4)), p)});
  }
  zoo.push_back({"linear-residual p=3 with G",
                 power_residual_oracle(linear_residuals(tall_dataset(6, 3, 5)), 3.0, random_spd(6, rng))});
  for (double p : {2.0, 3.0}) {
    zoo.push_back({"rosenbrock p=" + std::to_string(p), power_residual_oracle(rosenbrock_residuals(), p)});
  }
  for (double p : {2.0, 4.0}) {
    zoo.push_back({"chebyshev p=" + std::to_string(p), power_residual_oracle(chebyshev_residuals(4), p)});
  }
  zoo.push_back({"pnorm p=3", pnorm_oracle(3.0, NormPair::identity(5))});
  zoo.push_back({"pnorm p=4 B-norm", pnorm_oracle(4.0, NormPair(random_spd(4, rng)))});
  zoo.push_back({"exp", exp_scalar_oracle()});
  zoo.push_back({"quadratic", quadratic_oracle(random_spd(5, rng), random_vector(5, rng))});
  zoo.push_back({"scaled logistic", scaled_oracle(logistic_oracle(tall_dataset(10, 3, 6)), 2.5)});
  zoo.push_back({"affine logsumexp",
                 affine_oracle(logsumexp_oracle(tall_dataset(10, 4, 7), 1.0), random_matrix(4, 3, rng),
                               random_vector(4, rng))});
  return zoo;
}

}  // namespace grn::testing
