#include <Eigen/Dense>
#include <cmath>

#include "cmmd/errors.hpp"
#include "cmmd/rng.hpp"
#include "cmmd/thresholds.hpp"
#include "doctest.h"

using namespace cmmd;

namespace {

const KernelSpec kGauss = KernelSpec::gaussian(0.25);

GramMatrix random_gram(int n, Rng& rng) {
  Eigen::MatrixXd points(2, n);
  for (int j = 0; j < n; ++j) {
    points(0, j) = rng.uniform(-1.0, 1.0);
    points(1, j) = rng.uniform(-1.0, 1.0);
  }
  return gram(kGauss, points);
}

Eigen::MatrixXd random_psd(int q, Rng& rng) {
  Eigen::MatrixXd a(q, q);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < q; ++i) a(i, j) = rng.normal();
  return a * a.transpose() / q;
}

ThresholdParams unit_params(double delta) {
  ThresholdParams params;
  params.S = 1.0;
  params.rho = 1.0;
  params.trace_RV = 1.0;
  params.trace_RG = 1.0;
  params.hs_RG = 1.0;
  params.op_RG = 1.0;
  params.delta = delta;
  return params;
}

}  // namespace

TEST_SUITE("thresholds") {

TEST_CASE("log det term hand values") {
  const Eigen::MatrixXd none(1, 0);
  CHECK(log_det_term(gram(kGauss, none), 1.0) == 0.0);

  Eigen::MatrixXd one(1, 1);
  one << 0.3;
  CHECK(log_det_term(gram(kGauss, one), 1.0) ==
        doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("log det term matches the eigenvalue route") {
  Rng rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(10));
    const double lambda = trial % 2 == 0 ? 0.1 : 1.0;
    const GramMatrix g = random_gram(n, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.entries);
    double expected = 0.0;
    for (int j = 0; j < n; ++j)
      expected += 0.5 * std::log1p(std::max(0.0, eig.eigenvalues()(j)) / lambda);
    CHECK(log_det_term(g, lambda) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("log det term grows with the data") {
  Rng rng(72);
  Eigen::MatrixXd points(2, 15);
  for (int j = 0; j < 15; ++j)
    points.col(j) = Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  double previous = 0.0;
  for (int n = 1; n <= 15; ++n) {
    const double value = log_det_term(gram(kGauss, points.leftCols(n)), 0.1);
    CHECK(value >= previous - 1e-10);
    previous = value;
  }
}

TEST_CASE("online multiplier hand values") {
  const ThresholdParams params = unit_params(std::exp(-1.0));
  const Eigen::MatrixXd none(1, 0);
  CHECK(beta_online(params, gram(kGauss, none), 1.0) ==
        doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));

  Eigen::MatrixXd one(1, 1);
  one << 0.0;
  const double expected = 1.0 + std::sqrt(2.0 * (1.0 + 0.5 * std::log(2.0)));
  const double beta = beta_online(params, gram(kGauss, one), 1.0);
  CHECK(beta == doctest::Approx(expected).epsilon(1e-12));
  CHECK(beta - 1.0 == doctest::Approx(1.64105).epsilon(5e-5));
}

TEST_CASE("online multiplier is monotone in confidence and data") {
  Rng rng(73);
  const GramMatrix g = random_gram(8, rng);
  double previous = 1e300;
  for (double delta : {0.01, 0.05, 0.1, 0.5, 0.9}) {
    const double beta = beta_online(unit_params(delta), g, 0.1);
    CHECK(beta <= previous);
    previous = beta;
  }

  Eigen::MatrixXd points(2, 12);
  for (int j = 0; j < 12; ++j)
    points.col(j) = Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  previous = 0.0;
  for (int n = 1; n <= 12; ++n) {
    const double beta = beta_online(unit_params(0.1), gram(kGauss, points.leftCols(n)), 0.1);
    CHECK(beta >= previous - 1e-10);
    previous = beta;
  }
}

TEST_CASE("spectral norms hand values") {
  const Eigen::MatrixXd none(1, 0);
  const SpectralNorms empty = spectral_T_norms(gram(kGauss, none), 1.0, 1.0, 1.0, 1.0, 1.0);
  CHECK(empty.trace == 0.0);
  CHECK(empty.hs == 0.0);
  CHECK(empty.op == 0.0);

  Eigen::MatrixXd one(1, 1);
  one << 0.0;
  const SpectralNorms single = spectral_T_norms(gram(kGauss, one), 1.0, 1.0, 1.0, 1.0, 1.0);
  CHECK(single.trace == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(single.hs == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(single.op == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("spectral norms match a brute-force operator assembly") {
  Rng rng(74);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(10));
    const int q = 1 + static_cast<int>(rng.below(3));
    const double lambda = trial % 2 == 0 ? 0.1 : 0.7;
    const double rho = 0.5 + rng.uniform01();
    const GramMatrix g = random_gram(n, rng);
    const Eigen::MatrixXd rg = random_psd(q, rng);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rg_eig(rg);
    const double trace_rg = rg.trace();
    const double hs_rg = rg.norm();
    const double op_rg = rg_eig.eigenvalues().maxCoeff();

    // Assemble T on the nq-dimensional product space: the Gram block
    // kron(K, I) and the noise block kron(I, rho^2 R_G) commute, so
    // T = Rblock^{1/2} Kblock (Kblock + lambda)^{-1} Rblock^{1/2}.
    const Eigen::MatrixXd eye_n = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd eye_q = Eigen::MatrixXd::Identity(q, q);
    Eigen::MatrixXd kblock(n * q, n * q);
    Eigen::MatrixXd rblock(n * q, n * q);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        kblock.block(a * q, b * q, q, q) = g.entries(a, b) * eye_q;
        rblock.block(a * q, b * q, q, q) = eye_n(a, b) * rho * rho * rg;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> r_eig(rblock);
    const Eigen::MatrixXd r_half =
        r_eig.eigenvectors() *
        r_eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
        r_eig.eigenvectors().transpose();
    const Eigen::MatrixXd shrink =
        kblock * (kblock + lambda * Eigen::MatrixXd::Identity(n * q, n * q)).inverse();
    const Eigen::MatrixXd t = r_half * shrink * r_half;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> t_eig(t);
    const SpectralNorms norms = spectral_T_norms(g, lambda, rho, trace_rg, hs_rg, op_rg);
    CHECK(norms.trace == doctest::Approx(t.trace()).epsilon(1e-8));
    CHECK(norms.hs == doctest::Approx(t.norm()).epsilon(1e-8));
    CHECK(norms.op == doctest::Approx(t_eig.eigenvalues().maxCoeff()).epsilon(1e-8));
  }
}

TEST_CASE("fixed-time multiplier hand values") {
  const ThresholdParams params = unit_params(std::exp(-1.0));
  const Eigen::MatrixXd none(1, 0);
  CHECK(beta_fixed(params, gram(kGauss, none), 1.0) == doctest::Approx(1.0).epsilon(1e-14));

  Eigen::MatrixXd one(1, 1);
  one << 0.0;
  CHECK(beta_fixed(params, gram(kGauss, one), 1.0) ==
        doctest::Approx(1.0 + std::sqrt(2.5)).epsilon(1e-12));
}

TEST_CASE("fixed-time multiplier dominates the norm bound and tightens with delta") {
  Rng rng(75);
  const GramMatrix g = random_gram(9, rng);
  double previous = 0.0;
  for (double delta : {0.9, 0.5, 0.1, 0.05, 0.01}) {
    const double beta = beta_fixed(unit_params(delta), g, 0.1);
    CHECK(beta >= 1.0);
    CHECK(beta >= previous);
    previous = beta;
  }
}

TEST_CASE("parameter validation enforces the norm ordering") {
  ThresholdParams params = unit_params(0.1);
  CHECK_NOTHROW(params.validate());

  ThresholdParams bad = params;
  bad.op_RG = 2.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);

  bad = params;
  bad.hs_RG = 2.0;  // hs above trace
  CHECK_THROWS_AS(bad.validate(), ParameterError);

  bad = params;
  bad.delta = 0.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad.delta = 1.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);

  bad = params;
  bad.rho = -1.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);

  bad = params;
  bad.S = -0.5;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("threshold profile scales the posterior width") {
  Rng rng(76);
  DataSet data;
  data.covariates.resize(2, 10);
  data.measurements.resize(1, 10);
  for (int j = 0; j < 10; ++j) {
    data.covariates.col(j) = Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    data.measurements(0, j) = rng.normal();
  }
  ThresholdModel tm;
  tm.beta = 2.5;
  tm.source = ThresholdSource::AnalyticalOnline;
  tm.model = fit(data, kGauss, 0.1, KernelSpec::linear(0.0));

  const Eigen::MatrixXd xs = Eigen::MatrixXd::Random(2, 5);
  const Eigen::VectorXd profile = threshold_profile(tm, xs);
  for (int j = 0; j < 5; ++j) {
    const double expected = 2.5 * posterior_scale(tm.model, xs.col(j));
    CHECK(threshold_at(tm, xs.col(j)) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(profile(j) == doctest::Approx(expected).epsilon(1e-14));
  }
}

}  // TEST_SUITE
