#include "cmmd/features.hpp"

#include <cmath>

#include "cmmd/errors.hpp"

namespace cmmd {

Eigen::MatrixXd feature_map(const KernelSpec& spec,
                            const Eigen::Ref<const Eigen::MatrixXd>& points) {
  spec.validate();
  const Eigen::Index q = points.rows();
  const Eigen::Index n = points.cols();
  switch (spec.family) {
    case KernelFamily::Gaussian:
      throw MisuseError("the gaussian kernel has no finite feature map");
    case KernelFamily::LinearInhomogeneous: {
      Eigen::MatrixXd phi(q + 1, n);
      phi.row(0).setConstant(std::sqrt(spec.offset));
      phi.bottomRows(q) = points;
      return phi;
    }
    case KernelFamily::PolynomialInhomogeneous: {
      if (q != 1)
        throw MisuseError("polynomial feature map is implemented for scalar points only");
      const int m = spec.degree;
      Eigen::MatrixXd phi(m + 1, n);
      double binom = 1.0;  // binom(m, j), exact in double for small m
      for (int j = 0; j <= m; ++j) {
        if (j > 0) binom = binom * static_cast<double>(m - j + 1) / static_cast<double>(j);
        const double weight = std::sqrt(binom * std::pow(spec.offset, m - j));
        phi.row(j) = weight * points.row(0).array().pow(j).matrix();
      }
      return phi;
    }
  }
  throw ParameterError("unknown kernel family");
}

double cmmd_via_features(const FittedModel& model1, const FittedModel& model2,
                         const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!(model1.output_spec == model2.output_spec))
    throw MisuseError("models were fit with different output kernels");
  Eigen::VectorXd sum1, sum2;
  if (model1.size() > 0)
    sum1 = feature_map(model1.output_spec, model1.dual_targets) * dual_coefficients(model1, x);
  if (model2.size() > 0)
    sum2 = feature_map(model2.output_spec, model2.dual_targets) * dual_coefficients(model2, x);
  if (sum1.size() == 0 && sum2.size() == 0) return 0.0;
  if (sum1.size() == 0) return sum2.norm();
  if (sum2.size() == 0) return sum1.norm();
  if (sum1.size() != sum2.size())
    throw InputError("measurement sets have mismatched dimensions");
  return (sum1 - sum2).norm();
}

}  // namespace cmmd
