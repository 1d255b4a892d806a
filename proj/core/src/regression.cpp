#include "cmmd/regression.hpp"

#include <cmath>

#include "cmmd/errors.hpp"
#include "cmmd/linalg.hpp"

namespace cmmd {

void DataSet::validate() const {
  if (covariates.cols() != measurements.cols())
    throw InputError("data set has " + std::to_string(covariates.cols()) +
                     " covariates but " + std::to_string(measurements.cols()) +
                     " measurements");
  if (!covariates.allFinite() || !measurements.allFinite())
    throw InputError("data set contains non-finite entries");
}

FittedModel fit(const DataSet& data, const KernelSpec& k, double lambda,
                const KernelSpec& kappa) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ParameterError("ridge regularization must be a positive finite number");
  k.validate();
  kappa.validate();
  data.validate();

  FittedModel model;
  model.input_spec = k;
  model.lambda = lambda;
  model.train_covariates = data.covariates;
  model.dual_targets = data.measurements;
  model.output_spec = kappa;

  model.chol = gram(k, data.covariates).entries;
  model.chol.diagonal().array() += lambda;
  cholesky_in_place(model.chol, "ridge system");
  return model;
}

namespace {

void check_query_dimension(const FittedModel& model,
                           const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  if (model.size() > 0 && xs.cols() > 0 && xs.rows() != model.train_covariates.rows())
    throw InputError("query dimension " + std::to_string(xs.rows()) +
                     " does not match training dimension " +
                     std::to_string(model.train_covariates.rows()));
}

}  // namespace

Eigen::MatrixXd dual_coefficients_batch(const FittedModel& model,
                                        const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  check_query_dimension(model, xs);
  if (model.size() == 0) return Eigen::MatrixXd(0, xs.cols());
  Eigen::MatrixXd coeffs = cross_gram(model.input_spec, model.train_covariates, xs);
  cholesky_solve_in_place(model.chol, coeffs);
  return coeffs;
}

Eigen::VectorXd dual_coefficients(const FittedModel& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& x) {
  return dual_coefficients_batch(model, x);
}

double predict_scalar(const FittedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (model.dual_targets.rows() != 1 && model.size() > 0)
    throw MisuseError("scalar prediction requires one-dimensional measurements");
  if (model.size() == 0) return 0.0;
  return model.dual_targets.row(0).dot(dual_coefficients(model, x));
}

Eigen::VectorXd posterior_scale_profile(const FittedModel& model,
                                        const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  check_query_dimension(model, xs);
  Eigen::VectorXd diag = kernel_diagonal(model.input_spec, xs);
  if (model.size() == 0) return diag.cwiseSqrt();
  Eigen::MatrixXd cross = cross_gram(model.input_spec, model.train_covariates, xs);
  Eigen::MatrixXd solved = cross;
  cholesky_solve_in_place(model.chol, solved);
  Eigen::VectorXd explained = (cross.cwiseProduct(solved)).colwise().sum().transpose();
  return (diag - explained).cwiseMax(0.0).cwiseSqrt();
}

double posterior_scale(const FittedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return posterior_scale_profile(model, x)(0);
}

}  // namespace cmmd
