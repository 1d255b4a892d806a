#include <Eigen/Dense>
#include <cmath>

#include "cmmd/errors.hpp"
#include "cmmd/kernels.hpp"
#include "cmmd/linalg.hpp"
#include "cmmd/rng.hpp"
#include "doctest.h"

using namespace cmmd;

namespace {

Eigen::MatrixXd random_spd(int n, Rng& rng, double ridge) {
  Eigen::MatrixXd b(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) b(i, j) = rng.normal();
  return b * b.transpose() + ridge * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("cholesky factor reconstructs the matrix") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(15));
    const Eigen::MatrixXd a = random_spd(n, rng, 0.5);
    Eigen::MatrixXd chol = a;
    cholesky_in_place(chol, "test matrix");
    const Eigen::MatrixXd lower = chol.triangularView<Eigen::Lower>();
    const double rel = (lower * lower.transpose() - a).norm() / a.norm();
    CHECK(rel < 1e-12);
  }
}

TEST_CASE("solve matches a dense inverse") {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(12));
    const Eigen::MatrixXd a = random_spd(n, rng, 1.0);
    Eigen::MatrixXd rhs(n, 3);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < n; ++i) rhs(i, j) = rng.normal();

    Eigen::MatrixXd chol = a;
    cholesky_in_place(chol, "test matrix");
    Eigen::MatrixXd solved = rhs;
    cholesky_solve_in_place(chol, solved);
    CHECK((a.inverse() * rhs - solved).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("log determinant matches the eigenvalue route") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(10));
    const Eigen::MatrixXd a = random_spd(n, rng, 1.0);
    Eigen::MatrixXd chol = a;
    cholesky_in_place(chol, "test matrix");
    const double via_eigs =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().array().log().sum();
    CHECK(cholesky_log_det(chol) == doctest::Approx(via_eigs).epsilon(1e-10));
  }
}

TEST_CASE("singular PSD input succeeds through the jitter fallback") {
  // Duplicated gaussian-kernel points give an exactly rank-deficient Gram.
  Eigen::MatrixXd pts(1, 3);
  pts << 0.4, 0.4, -0.2;
  Eigen::MatrixXd g = gram(KernelSpec::gaussian(0.25), pts).entries;
  cholesky_in_place(g, "duplicated points");
  const Eigen::MatrixXd lower = g.triangularView<Eigen::Lower>();
  CHECK(std::isfinite(lower.diagonal().minCoeff()));
  CHECK(lower.diagonal().minCoeff() > 0.0);
}

TEST_CASE("indefinite input is rejected after jitter escalation") {
  Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(cholesky_in_place(neg, "negative definite"), NumericalError);
}

TEST_CASE("factorization counter increments once per call") {
  Rng rng(24);
  Eigen::MatrixXd a = random_spd(5, rng, 1.0);
  const std::uint64_t before = cholesky_count();
  cholesky_in_place(a, "counter check");
  CHECK(cholesky_count() == before + 1);
}

TEST_CASE("pivoted cholesky factor reproduces the gram matrix") {
  Rng rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(15));
    Eigen::MatrixXd pts(2, n);
    for (int j = 0; j < n; ++j) {
      pts(0, j) = rng.uniform(-1.0, 1.0);
      pts(1, j) = rng.uniform(-1.0, 1.0);
    }
    const KernelSpec spec = KernelSpec::gaussian(0.5);
    const Eigen::MatrixXd g = gram(spec, pts).entries;
    const LowRankFactor f = pivoted_cholesky(
        g.diagonal(), [&](int j) -> Eigen::VectorXd { return g.col(j); });
    CHECK(f.rank <= n);
    CHECK((f.factor.transpose() * f.factor - g).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("pivoted cholesky rank is bounded by the feature dimension") {
  Rng rng(26);
  const int n = 30;
  const int q = 3;
  Eigen::MatrixXd pts(q, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < q; ++i) pts(i, j) = rng.normal();

  const Eigen::MatrixXd g0 = gram(KernelSpec::linear(0.0), pts).entries;
  const LowRankFactor f0 = pivoted_cholesky(
      g0.diagonal(), [&](int j) -> Eigen::VectorXd { return g0.col(j); });
  CHECK(f0.rank <= q);

  const Eigen::MatrixXd g1 = gram(KernelSpec::linear(1.0), pts).entries;
  const LowRankFactor f1 = pivoted_cholesky(
      g1.diagonal(), [&](int j) -> Eigen::VectorXd { return g1.col(j); });
  CHECK(f1.rank <= q + 1);
  CHECK((f1.factor.transpose() * f1.factor - g1).cwiseAbs().maxCoeff() < 1e-8);
}

}  // TEST_SUITE
