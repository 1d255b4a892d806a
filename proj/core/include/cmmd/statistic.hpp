#ifndef CMMD_STATISTIC_HPP
#define CMMD_STATISTIC_HPP

#include <Eigen/Dense>

#include "cmmd/linalg.hpp"
#include "cmmd/regression.hpp"

namespace cmmd {

// Cached output-kernel cross-Grams for one model pair, so profile evaluation
// pays the n^2 blocks once rather than per query point.
struct CmmdWorkspace {
  Eigen::MatrixXd c11;  // kappa-Gram of model1 measurements
  Eigen::MatrixXd c12;
  Eigen::MatrixXd c22;
};

CmmdWorkspace cmmd_workspace(const FittedModel& model1, const FittedModel& model2);

// CMMD(x) = || f_{D1,lambda1}(x) - f_{D2,lambda2}(x) ||_{H_kappa}
//         = sqrt(max(0, a1' C11 a1 - 2 a1' C12 a2 + a2' C22 a2))
// with a_i the dual coefficients of model i at x. Empty models contribute 0.
double cmmd(const FittedModel& model1, const FittedModel& model2,
            const Eigen::Ref<const Eigen::VectorXd>& x);

Eigen::VectorXd cmmd_profile(const FittedModel& model1, const FittedModel& model2,
                             const Eigen::Ref<const Eigen::MatrixXd>& xs);

// Low-rank factor P (rank x n) with P' P = kappa-Gram of the measurement
// columns, built by pivoted Cholesky without materializing the Gram matrix.
// Any CMMD between models whose measurements are columns of `measurements`
// reduces to a Euclidean norm in rank-r coordinates; the bootstrap loops live
// there. This is still the kernel trick (factor of the Gram), not an explicit
// feature map.
LowRankFactor measurement_factor(const KernelSpec& kappa,
                                 const Eigen::Ref<const Eigen::MatrixXd>& measurements,
                                 double tol = 1e-12);

}  // namespace cmmd

#endif
