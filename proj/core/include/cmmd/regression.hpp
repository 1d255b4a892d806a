#ifndef CMMD_REGRESSION_HPP
#define CMMD_REGRESSION_HPP

#include <Eigen/Dense>

#include "cmmd/kernels.hpp"

namespace cmmd {

// Paired covariates (d x n) and measurements (q x n), one sample per column.
struct DataSet {
  Eigen::MatrixXd covariates;
  Eigen::MatrixXd measurements;

  Eigen::Index size() const { return covariates.cols(); }

  // Throws InputError on column-count mismatch or non-finite entries.
  void validate() const;
};

// Kernel ridge regression in dual form. The model keeps the raw measurements;
// output-kernel structure is applied lazily by the statistic layer, so the
// same fit serves scalar and functional measurements alike.
struct FittedModel {
  KernelSpec input_spec;
  double lambda = 1.0;
  Eigen::MatrixXd train_covariates;  // d x n
  Eigen::MatrixXd chol;              // lower-triangular factor of K + lambda*I
  Eigen::MatrixXd dual_targets;      // raw measurements, q x n
  KernelSpec output_spec;

  Eigen::Index size() const { return train_covariates.cols(); }
};

FittedModel fit(const DataSet& data, const KernelSpec& k, double lambda, const KernelSpec& kappa);

// alpha(x) = (K + lambda I)^{-1} k(X, x), length n (empty for an empty model).
Eigen::VectorXd dual_coefficients(const FittedModel& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& x);

// Batched variant: one column of coefficients per query column.
Eigen::MatrixXd dual_coefficients_batch(const FittedModel& model,
                                        const Eigen::Ref<const Eigen::MatrixXd>& xs);

// alpha(x)^T y for scalar measurements (q = 1); the empty model predicts 0.
double predict_scalar(const FittedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

// sigma_{D,lambda}(x) = sqrt(max(0, k(x,x) - k(x,X)^T alpha(x))).
double posterior_scale(const FittedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

Eigen::VectorXd posterior_scale_profile(const FittedModel& model,
                                        const Eigen::Ref<const Eigen::MatrixXd>& xs);

}  // namespace cmmd

#endif
