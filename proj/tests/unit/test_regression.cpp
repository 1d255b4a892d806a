#include <Eigen/Dense>
#include <cmath>

#include "cmmd/errors.hpp"
#include "cmmd/regression.hpp"
#include "cmmd/rng.hpp"
#include "doctest.h"

using namespace cmmd;

namespace {

DataSet random_scalar_data(int d, int n, Rng& rng) {
  DataSet data;
  data.covariates.resize(d, n);
  data.measurements.resize(1, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < d; ++i) data.covariates(i, j) = rng.uniform(-1.0, 1.0);
    data.measurements(0, j) = rng.normal();
  }
  return data;
}

const KernelSpec kGauss = KernelSpec::gaussian(0.25);
const KernelSpec kLin = KernelSpec::linear(1.0);

}  // namespace

TEST_SUITE("regression") {

TEST_CASE("empty data produces a valid empty model") {
  DataSet data;
  data.covariates.resize(2, 0);
  data.measurements.resize(1, 0);
  const FittedModel model = fit(data, kGauss, 1.0, kLin);
  CHECK(model.size() == 0);

  Eigen::Vector2d x(0.1, 0.2);
  CHECK(dual_coefficients(model, x).size() == 0);
  CHECK(predict_scalar(model, x) == 0.0);
  CHECK(posterior_scale(model, x) == 1.0);
}

TEST_CASE("single gaussian point has the hand cholesky factor") {
  DataSet data;
  data.covariates.resize(1, 1);
  data.covariates << 0.3;
  data.measurements.resize(1, 1);
  data.measurements << 2.0;
  const FittedModel model = fit(data, kGauss, 1.0, kLin);
  CHECK(model.chol(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  Eigen::VectorXd x(1);
  x << 0.3;
  const Eigen::VectorXd alpha = dual_coefficients(model, x);
  REQUIRE(alpha.size() == 1);
  CHECK(alpha(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(predict_scalar(model, x) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(posterior_scale(model, x) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("fit succeeds at the two-dimensional experiment scale") {
  Rng rng(41);
  const DataSet data = random_scalar_data(2, 100, rng);
  const FittedModel model = fit(data, kGauss, 0.1, kLin);
  CHECK(model.size() == 100);
  const Eigen::MatrixXd lower = model.chol.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd system =
      gram(kGauss, data.covariates).entries + 0.1 * Eigen::MatrixXd::Identity(100, 100);
  CHECK((lower * lower.transpose() - system).norm() / system.norm() < 1e-8);
}

TEST_CASE("invalid inputs are rejected") {
  Rng rng(42);
  DataSet data = random_scalar_data(2, 5, rng);
  CHECK_THROWS_AS(fit(data, kGauss, 0.0, kLin), ParameterError);
  CHECK_THROWS_AS(fit(data, kGauss, -1.0, kLin), ParameterError);

  DataSet bad = data;
  bad.measurements(0, 2) = std::nan("");
  CHECK_THROWS_AS(fit(bad, kGauss, 0.1, kLin), InputError);

  DataSet mismatched = data;
  mismatched.measurements.conservativeResize(1, 4);
  CHECK_THROWS_AS(fit(mismatched, kGauss, 0.1, kLin), InputError);

  const FittedModel model = fit(data, kGauss, 0.1, kLin);
  Eigen::Vector3d wrong_dim(0.0, 0.0, 0.0);
  CHECK_THROWS_AS(dual_coefficients(model, wrong_dim), InputError);
}

TEST_CASE("predict_scalar requires scalar measurements") {
  Rng rng(43);
  DataSet data;
  data.covariates = Eigen::MatrixXd::Random(2, 4);
  data.measurements = Eigen::MatrixXd::Random(3, 4);
  const FittedModel model = fit(data, kGauss, 0.5, kLin);
  Eigen::Vector2d x(0.0, 0.0);
  CHECK_THROWS_AS(predict_scalar(model, x), MisuseError);
}

TEST_CASE("prediction magnitude shrinks as lambda grows") {
  DataSet data;
  data.covariates.resize(1, 1);
  data.covariates << 0.0;
  data.measurements.resize(1, 1);
  data.measurements << 3.0;
  Eigen::VectorXd x(1);
  x << 0.0;

  double previous = 4.0;
  for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    const double pred = std::abs(predict_scalar(fit(data, kGauss, lambda, kLin), x));
    CHECK(pred < previous);
    previous = pred;
  }
}

TEST_CASE("posterior variance identity holds at random queries") {
  Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(15));
    const DataSet data = random_scalar_data(2, n, rng);
    const FittedModel model = fit(data, kGauss, 0.3, kLin);
    for (int probe = 0; probe < 5; ++probe) {
      Eigen::Vector2d x(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      const Eigen::VectorXd alpha = dual_coefficients(model, x);
      const Eigen::VectorXd kx = cross_gram(kGauss, data.covariates, x).col(0);
      const double sigma = posterior_scale(model, x);
      CHECK(sigma * sigma + kx.dot(alpha) == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("small-lambda fits interpolate the training targets") {
  Rng rng(45);
  DataSet data = random_scalar_data(1, 5, rng);
  // Spread covariates to keep the gram well conditioned.
  data.covariates << -1.0, -0.5, 0.0, 0.5, 1.0;
  const FittedModel model = fit(data, kGauss, 1e-10, kLin);
  for (int j = 0; j < 5; ++j) {
    const double pred = predict_scalar(model, data.covariates.col(j));
    CHECK(pred == doctest::Approx(data.measurements(0, j)).epsilon(1e-4));
  }
}

TEST_CASE("appending a data point never raises the posterior scale") {
  Rng rng(46);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(14));
    DataSet data = random_scalar_data(2, n, rng);
    DataSet extended = data;
    extended.covariates.conservativeResize(2, n + 1);
    extended.measurements.conservativeResize(1, n + 1);
    extended.covariates.col(n) = Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    extended.measurements(0, n) = rng.normal();

    const FittedModel before = fit(data, kGauss, 0.2, kLin);
    const FittedModel after = fit(extended, kGauss, 0.2, kLin);
    for (int probe = 0; probe < 5; ++probe) {
      Eigen::Vector2d x(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      CHECK(posterior_scale(after, x) <= posterior_scale(before, x) + 1e-10);
    }
  }
}

TEST_CASE("dual coefficients match the dense inverse oracle") {
  Rng rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(20));
    const KernelSpec spec = trial % 2 == 0 ? kGauss : kLin;
    const double lambda = trial % 3 == 0 ? 0.1 : 1.0;
    const DataSet data = random_scalar_data(2, n, rng);
    const FittedModel model = fit(data, spec, lambda, kLin);

    const Eigen::MatrixXd system =
        gram(spec, data.covariates).entries + lambda * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd inverse = system.inverse();

    Eigen::Vector2d x(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const Eigen::VectorXd kx = cross_gram(spec, data.covariates, x).col(0);
    const Eigen::VectorXd alpha = dual_coefficients(model, x);
    CHECK((alpha - inverse * kx).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("batched dual coefficients match per-point queries") {
  Rng rng(48);
  const DataSet data = random_scalar_data(2, 12, rng);
  const FittedModel model = fit(data, kGauss, 0.5, kLin);
  const Eigen::MatrixXd xs = Eigen::MatrixXd::Random(2, 7);
  const Eigen::MatrixXd batch = dual_coefficients_batch(model, xs);
  REQUIRE(batch.cols() == 7);
  for (int j = 0; j < 7; ++j) {
    const Eigen::VectorXd single = dual_coefficients(model, xs.col(j));
    CHECK((batch.col(j) - single).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("posterior scale profile matches pointwise evaluation") {
  Rng rng(49);
  const DataSet data = random_scalar_data(2, 10, rng);
  const FittedModel model = fit(data, kGauss, 0.5, kLin);
  const Eigen::MatrixXd xs = Eigen::MatrixXd::Random(2, 6);
  const Eigen::VectorXd profile = posterior_scale_profile(model, xs);
  for (int j = 0; j < 6; ++j)
    CHECK(profile(j) == doctest::Approx(posterior_scale(model, xs.col(j))).epsilon(1e-12));
}

}  // TEST_SUITE
