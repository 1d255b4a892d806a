#include "cmmd/statistic.hpp"

#include <cmath>

#include "cmmd/errors.hpp"

namespace cmmd {

namespace {

void check_pair(const FittedModel& model1, const FittedModel& model2) {
  if (!(model1.output_spec == model2.output_spec))
    throw MisuseError("models were fit with different output kernels");
  if (model1.size() > 0 && model2.size() > 0 &&
      model1.dual_targets.rows() != model2.dual_targets.rows())
    throw InputError("measurement sets have mismatched dimensions");
}

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return a.size() == 0 || (a.array() == b.array()).all();
}

int compare_matrices(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows() ? -1 : 1;
  if (a.cols() != b.cols()) return a.cols() < b.cols() ? -1 : 1;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = a.data()[i];
    const double y = b.data()[i];
    if (x != y) return x < y ? -1 : 1;
  }
  return 0;
}

int compare_specs(const KernelSpec& a, const KernelSpec& b) {
  if (a.family != b.family) return static_cast<int>(a.family) < static_cast<int>(b.family) ? -1 : 1;
  if (a.bandwidth != b.bandwidth) return a.bandwidth < b.bandwidth ? -1 : 1;
  if (a.degree != b.degree) return a.degree < b.degree ? -1 : 1;
  if (a.offset != b.offset) return a.offset < b.offset ? -1 : 1;
  return 0;
}

// Total order on model content. The statistic is symmetric in its two models,
// so evaluating in a canonical orientation makes the symmetry exact in
// floating point rather than up to summation-order roundoff.
bool model_precedes(const FittedModel& a, const FittedModel& b) {
  if (a.lambda != b.lambda) return a.lambda < b.lambda;
  if (int c = compare_specs(a.input_spec, b.input_spec); c != 0) return c < 0;
  if (int c = compare_matrices(a.train_covariates, b.train_covariates); c != 0) return c < 0;
  return compare_matrices(a.dual_targets, b.dual_targets) < 0;
}

}  // namespace

CmmdWorkspace cmmd_workspace(const FittedModel& model1, const FittedModel& model2) {
  check_pair(model1, model2);
  CmmdWorkspace ws;
  const KernelSpec& kappa = model1.output_spec;
  ws.c11 = gram(kappa, model1.dual_targets).entries;
  if (same_matrix(model1.dual_targets, model2.dual_targets)) {
    // Shared measurement sets reuse one Gram, so identically fitted models
    // cancel exactly instead of leaving sqrt-of-roundoff noise.
    ws.c12 = ws.c11;
    ws.c22 = ws.c11;
  } else {
    ws.c12 = cross_gram(kappa, model1.dual_targets, model2.dual_targets);
    ws.c22 = gram(kappa, model2.dual_targets).entries;
  }
  return ws;
}

namespace {

Eigen::VectorXd profile_with_workspace(const FittedModel& model1, const FittedModel& model2,
                                       const CmmdWorkspace& ws,
                                       const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  Eigen::MatrixXd a1 = dual_coefficients_batch(model1, xs);
  Eigen::MatrixXd a2 = dual_coefficients_batch(model2, xs);
  Eigen::ArrayXd squared =
      (a1.cwiseProduct(ws.c11 * a1)).colwise().sum().transpose().array() -
      2.0 * (a1.cwiseProduct(ws.c12 * a2)).colwise().sum().transpose().array() +
      (a2.cwiseProduct(ws.c22 * a2)).colwise().sum().transpose().array();
  return squared.max(0.0).sqrt().matrix();
}

}  // namespace

double cmmd(const FittedModel& model1, const FittedModel& model2,
            const Eigen::Ref<const Eigen::VectorXd>& x) {
  return cmmd_profile(model1, model2, x)(0);
}

Eigen::VectorXd cmmd_profile(const FittedModel& model1, const FittedModel& model2,
                             const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  const bool swap = model_precedes(model2, model1);
  const FittedModel& first = swap ? model2 : model1;
  const FittedModel& second = swap ? model1 : model2;
  return profile_with_workspace(first, second, cmmd_workspace(first, second), xs);
}

LowRankFactor measurement_factor(const KernelSpec& kappa,
                                 const Eigen::Ref<const Eigen::MatrixXd>& measurements,
                                 double tol) {
  Eigen::VectorXd diag = kernel_diagonal(kappa, measurements);
  auto column = [&kappa, &measurements](int j) -> Eigen::VectorXd {
    return cross_gram(kappa, measurements, measurements.col(j));
  };
  return pivoted_cholesky(diag, column, tol);
}

}  // namespace cmmd
