#include <doctest.h>

#include <cmath>
#include <random>

#include "grn/objectives.hpp"
#include "support.hpp"

using namespace grn;
using grn::testing::fd_gradient;
using grn::testing::fd_hessian;
using grn::testing::random_vector;
using grn::testing::rel_err;

TEST_CASE("every objective matches finite differences") {
  std::mt19937_64 rng(11);
  for (const auto& entry : grn::testing::objective_zoo()) {
    CAPTURE(entry.name);
    const Oracle& f = *entry.oracle;
    for (int i = 0; i < 5; ++i) {
      const Vector x = random_vector(f.dim(), rng, entry.point_scale);
      CHECK(rel_err(f.gradient(x), fd_gradient(f, x)) < 1e-5);
      CHECK(rel_err(f.hessian(x), fd_hessian(f, x)) < 1e-5);
    }
  }
}

TEST_CASE("LogSumExp examples") {
  const Dataset d = synthetic_dataset(6, 3, 1);
  const OraclePtr f = logsumexp_oracle(Dataset{d.A, Vector::Zero(6), ""}, 0.5);
  CHECK(f->value(Vector::Zero(3)) == doctest::Approx(0.5 * std::log(6.0)));
  const auto s = f->structure(Vector::Zero(3));
  REQUIRE(s.has_value());
  REQUIRE(s->softmax.has_value());
  CHECK((*s->softmax - Vector::Constant(6, 1.0 / 6.0)).norm() < 1e-15);

  const Dataset one = synthetic_dataset(1, 3, 2);
  const OraclePtr g = logsumexp_oracle(one, 0.1);
  const Vector x{{0.3, -0.2, 0.9}};
  CHECK(g->value(x) == doctest::Approx(one.A.row(0).dot(x) - one.b[0]).epsilon(1e-12));
}

TEST_CASE("LogSumExp is overflow safe") {
  const Dataset d = synthetic_dataset(5, 2, 3);
  const OraclePtr f = logsumexp_oracle(d, 0.01);
  const Vector x{{500.0, -300.0}};
  CHECK(std::isfinite(f->value(x)));
  CHECK(f->gradient(x).allFinite());
}

TEST_CASE("logistic examples") {
  Dataset d{Matrix{{1.0, 2.0}}, Vector{{3.0}}, ""};
  const OraclePtr f = logistic_oracle(d);
  const Vector x{{1.0, 1.0}};
  CHECK(f->value(x) == doctest::Approx(std::log(2.0)));
  CHECK((f->gradient(x) - 0.5 * Vector{{1.0, 2.0}}).norm() < 1e-15);

  Dataset far{Matrix{{1.0}}, Vector{{700.0}}, ""};
  const OraclePtr g = logistic_oracle(far);
  const double v = g->value(Vector::Zero(1));
  CHECK(v >= 0.0);
  CHECK(v < 1e-300);
  CHECK(std::isfinite(g->value(Vector::Constant(1, 1e4))));
}

TEST_CASE("power residual examples") {
  Dataset id{Matrix::Identity(3, 3), Vector::Zero(3), ""};
  const OraclePtr f = power_residual_oracle(linear_residuals(id), 2.0);
  const Vector x{{1.0, -2.0, 0.5}};
  CHECK(f->value(x) == doctest::Approx(0.5 * x.squaredNorm()));
  CHECK((f->gradient(x) - x).norm() < 1e-15);

  const OraclePtr r = power_residual_oracle(rosenbrock_residuals(), 3.0);
  CHECK(r->value(Vector{{1.0, 1.0}}) == 0.0);
  CHECK(r->gradient(Vector{{1.0, 1.0}}).norm() == 0.0);
}

TEST_CASE("Rosenbrock residuals") {
  const ResidualPtr u = rosenbrock_residuals();
  CHECK(u->residuals(Vector{{1.0, 1.0}}).norm() == 0.0);
  CHECK((u->residuals(Vector{{0.0, 0.0}}) - Vector{{1.0, 0.0}}).norm() == 0.0);
  CHECK(u->residuals(Vector{{-2.0, 2.0}}).squaredNorm() == doctest::Approx(409.0));
  const OraclePtr f = power_residual_oracle(u, 2.0);
  const double classic = 9.0 + 100.0 * 4.0;  // (1-x1)^2 + 100 (x2 - x1^2)^2
  CHECK(f->value(Vector{{-2.0, 2.0}}) == doctest::Approx(0.5 * classic));
}

TEST_CASE("Chebyshev residuals") {
  CHECK(chebyshev_residuals(5)->residuals(Vector::Ones(5)).norm() == 0.0);
  const Vector u1 = chebyshev_residuals(1)->residuals(Vector{{0.4}});
  REQUIRE(u1.size() == 1);
  CHECK(u1[0] == doctest::Approx(0.3));

  std::mt19937_64 rng(12);
  const Vector x = random_vector(4, rng);
  double expanded = 0.25 * (1 - x[0]) * (1 - x[0]);
  for (int i = 0; i < 3; ++i) expanded += std::pow(x[i + 1] - 2 * x[i] * x[i] + 1, 2);
  CHECK(chebyshev_residuals(4)->residuals(x).squaredNorm() == doctest::Approx(expanded).epsilon(1e-14));
}

TEST_CASE("residual second derivatives match finite differences of the Jacobian") {
  std::mt19937_64 rng(13);
  for (const ResidualPtr& u : {rosenbrock_residuals(), chebyshev_residuals(4)}) {
    REQUIRE(u->has_second_derivatives());
    const Vector x = random_vector(u->input_dim(), rng);
    const Vector w = random_vector(u->output_dim(), rng);
    Matrix fd(u->input_dim(), u->input_dim());
    for (Index j = 0; j < x.size(); ++j) {
      Vector xp = x, xm = x;
      xp[j] += 1e-6;
      xm[j] -= 1e-6;
      fd.col(j) = (u->jacobian(xp) - u->jacobian(xm)).transpose() * w / 2e-6;
    }
    CHECK(rel_err(u->weighted_second_derivative(x, w), fd) < 1e-6);
  }
}

TEST_CASE("p-norm examples") {
  const OraclePtr f2 = pnorm_oracle(2.0, NormPair::identity(3));
  std::mt19937_64 rng(14);
  const Vector x = random_vector(3, rng);
  CHECK((f2->hessian(x) - Matrix::Identity(3, 3)).norm() < 1e-14);

  const OraclePtr f4 = pnorm_oracle(4.0, NormPair::identity(3));
  CHECK(f4->value(Vector::Zero(3)) == 0.0);
  CHECK(f4->gradient(Vector::Zero(3)).norm() == 0.0);

  const OraclePtr f3 = pnorm_oracle(3.0, NormPair::identity(2));
  const Vector e1{{1.0, 0.0}};
  CHECK((f3->gradient(e1) - e1).norm() < 1e-15);
  CHECK((f3->hessian(e1) - Matrix{{2.0, 0.0}, {0.0, 1.0}}).norm() < 1e-14);
}

TEST_CASE("exp examples") {
  const OraclePtr f = exp_scalar_oracle();
  const Vector zero = Vector::Zero(1), one = Vector::Ones(1);
  CHECK(f->value(zero) == 1.0);
  CHECK(f->gradient(zero)[0] == 1.0);
  CHECK(f->hessian(zero)(0, 0) == 1.0);
  CHECK(f->value(one) == doctest::Approx(std::exp(1.0)));
  CHECK(f->hessian(one)(0, 0) == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("objective factories validate input") {
  CHECK_THROWS_AS(logsumexp_oracle(Dataset{}, 1.0), DomainError);
  CHECK_THROWS_AS(logsumexp_oracle(synthetic_dataset(3, 2, 1), 0.0), DomainError);
  CHECK_THROWS_AS(logistic_oracle(Dataset{}), DomainError);
  CHECK_THROWS_AS(power_residual_oracle(rosenbrock_residuals(), 1.5), DomainError);
  const OraclePtr f = logistic_oracle(synthetic_dataset(3, 2, 1));
  CHECK_THROWS_AS(f->value(Vector::Zero(3)), DomainError);
}

TEST_CASE("scaled and affine wrappers") {
  std::mt19937_64 rng(15);
  const OraclePtr base = logistic_oracle(synthetic_dataset(8, 3, 4));
  const OraclePtr s = scaled_oracle(base, 3.0);
  const Vector x = random_vector(3, rng);
  CHECK(s->value(x) == doctest::Approx(3.0 * base->value(x)));
  CHECK(rel_err(s->hessian(x), 3.0 * base->hessian(x)) < 1e-14);

  const Matrix M = grn::testing::random_matrix(3, 2, rng);
  const Vector shift = random_vector(3, rng);
  const OraclePtr a = affine_oracle(base, M, shift);
  const Vector y = random_vector(2, rng);
  CHECK(a->value(y) == doctest::Approx(base->value(M * y + shift)));
  CHECK(rel_err(a->hessian(y), M.transpose() * base->hessian(M * y + shift) * M) < 1e-14);
}
