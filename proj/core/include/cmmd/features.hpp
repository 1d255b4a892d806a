#ifndef CMMD_FEATURES_HPP
#define CMMD_FEATURES_HPP

#include <Eigen/Dense>

#include "cmmd/regression.hpp"

namespace cmmd {

// Explicit finite-dimensional feature maps for the inner-product kernel
// families, used as an independent oracle against the Gram-matrix code path.
// Production code never goes through here.
//
// linear, offset c:   phi(z) = (sqrt(c), z_1, ..., z_q)
// polynomial, scalar: phi(z) = (sqrt(binom(m,j) c^{m-j}) z^j)_{j=0..m}
//
// The Gaussian family has no finite feature map and raises MisuseError, as
// does a polynomial kernel on multivariate measurements.
Eigen::MatrixXd feature_map(const KernelSpec& spec,
                            const Eigen::Ref<const Eigen::MatrixXd>& points);

// || Phi_1 a_1(x) - Phi_2 a_2(x) ||_2 computed entirely in feature space.
double cmmd_via_features(const FittedModel& model1, const FittedModel& model2,
                         const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace cmmd

#endif
