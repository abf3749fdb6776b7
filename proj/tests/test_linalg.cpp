#include <doctest.h>

#include <cmath>
#include <random>

#include "grn/linalg.hpp"
#include "support.hpp"

using namespace grn;
using grn::testing::random_spd;
using grn::testing::random_vector;

TEST_CASE("primal norm") {
  CHECK(NormPair::identity(2).primal_norm(Vector::Zero(2)) == 0.0);
  CHECK(NormPair::identity(2).primal_norm(Vector{{3.0, 4.0}}) == doctest::Approx(5.0));
  const NormPair np(Vector{{4.0, 1.0}}.asDiagonal().toDenseMatrix());
  CHECK(np.primal_norm(Vector{{1.0, 1.0}}) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("dual norm") {
  CHECK(NormPair::identity(2).dual_norm(Vector::Zero(2)) == 0.0);
  CHECK(NormPair::identity(2).dual_norm(Vector{{3.0, 4.0}}) == doctest::Approx(5.0));
  const NormPair np(Vector{{4.0, 1.0}}.asDiagonal().toDenseMatrix());
  CHECK(np.dual_norm(Vector{{2.0, 1.0}}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("norms are dual to each other") {
  std::mt19937_64 rng(1);
  const NormPair np(random_spd(6, rng));
  for (int i = 0; i < 20; ++i) {
    const Vector s = random_vector(6, rng), h = random_vector(6, rng);
    CHECK(std::abs(s.dot(h)) <= np.dual_norm(s) * np.primal_norm(h) * (1 + 1e-12));
    // Equality at h = B^{-1}s.
    const Vector hs = np.solve(s);
    CHECK(s.dot(hs) == doctest::Approx(np.dual_norm(s) * np.primal_norm(hs)).epsilon(1e-12));
  }
}

TEST_CASE("NormPair rejects non-SPD and non-symmetric matrices") {
  CHECK_THROWS_AS(NormPair(Matrix{{1.0, 2.0}, {0.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(NormPair(Matrix{{1.0, 0.0}, {0.0, -1.0}}), DomainError);
  CHECK_THROWS_AS(NormPair::identity(2).primal_norm(Vector::Zero(3)), DomainError);
}

TEST_CASE("whiten gives the B-geometry operator") {
  std::mt19937_64 rng(2);
  const Matrix B = random_spd(4, rng);
  const NormPair np(B);
  CHECK((np.whiten(B) - Matrix::Identity(4, 4)).norm() < 1e-10);
}

TEST_CASE("solve_regularized examples") {
  const NormPair I2 = NormPair::identity(2);
  const Vector d0 = solve_regularized(PsdOperator::zero(2), I2, 1.0, Vector{{2.0, 4.0}});
  CHECK((d0 - Vector{{2.0, 4.0}}).norm() < 1e-14);
  const Vector d1 = solve_regularized(PsdOperator::dense(Matrix::Identity(2, 2)), I2, 1.0, Vector{{2.0, 0.0}});
  CHECK((d1 - Vector{{1.0, 0.0}}).norm() < 1e-14);

  std::mt19937_64 rng(3);
  const Matrix M = grn::testing::random_matrix(8, 8, rng);
  const Matrix H = M.transpose() * M;
  const Vector g = random_vector(8, rng);
  const Vector d = solve_regularized(PsdOperator::dense(H), NormPair::identity(8), 0.5, g);
  const Vector ref = (H + 0.5 * Matrix::Identity(8, 8)).inverse() * g;
  CHECK((d - ref).norm() / ref.norm() < 1e-10);
}

TEST_CASE("solve_regularized with a general B and a rank-one operator") {
  std::mt19937_64 rng(4);
  const Matrix B = random_spd(5, rng);
  const NormPair np(B);
  const Vector v = random_vector(5, rng), g = random_vector(5, rng);
  const PsdOperator H = PsdOperator::rank_one(2.0, v);
  const Vector d = solve_regularized(H, np, 0.7, g);
  const Vector ref = (2.0 * v * v.transpose() + 0.7 * B).llt().solve(g);
  CHECK((d - ref).norm() / ref.norm() < 1e-10);
}

TEST_CASE("indefinite system raises LinalgError") {
  const PsdOperator H = PsdOperator::dense(Matrix{{-5.0, 0.0}, {0.0, 1.0}});
  CHECK_THROWS_AS(solve_regularized(H, NormPair::identity(2), 1.0, Vector{{1.0, 1.0}}), LinalgError);
}

TEST_CASE("Sherman-Morrison examples") {
  const NormPair I2 = NormPair::identity(2);
  const Vector g{{1.0, 2.0}};
  CHECK((solve_rank_one_regularized(0.0, Vector{{1.0, 1.0}}, 4.0, I2, g) - g / 4.0).norm() < 1e-15);
  const Vector e1{{1.0, 0.0}};
  CHECK((solve_rank_one_regularized(1.0, e1, 1.0, I2, e1) - e1 / 2.0).norm() < 1e-15);

  std::mt19937_64 rng(5);
  const NormPair np(random_spd(10, rng));
  const Vector v = random_vector(10, rng), rhs = random_vector(10, rng);
  const Vector d = solve_rank_one_regularized(3.0, v, 0.2, np, rhs);
  const Vector ref = (3.0 * v * v.transpose() + 0.2 * np.B()).llt().solve(rhs);
  CHECK((d - ref).norm() / ref.norm() < 1e-10);
}

TEST_CASE("PsdOperator apply matches to_dense") {
  std::mt19937_64 rng(6);
  const Vector v = random_vector(4, rng), h = random_vector(4, rng);
  auto base = std::make_shared<const Matrix>(random_spd(4, rng));
  const PsdOperator ops[] = {PsdOperator::zero(4), PsdOperator::dense(random_spd(4, rng)),
                             PsdOperator::constant_dense(base), PsdOperator::rank_one(1.5, v, 0.3, base)};
  for (const PsdOperator& op : ops) {
    CHECK((op.apply(h) - op.to_dense() * h).norm() < 1e-12);
  }
}

TEST_CASE("power iteration finds the spectral norm") {
  const Matrix S = Vector{{-3.0, 2.0, 1.0}}.asDiagonal().toDenseMatrix();
  CHECK(power_iteration_norm(S, 200, 1e-12) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(power_iteration_norm(Matrix::Zero(3, 3)) == 0.0);
}
