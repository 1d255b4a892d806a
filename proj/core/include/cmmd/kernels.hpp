#ifndef CMMD_KERNELS_HPP
#define CMMD_KERNELS_HPP

#include <Eigen/Dense>

namespace cmmd {

// Scalar positive-definite kernels. Points are dense column vectors; a set of
// points is a d x n matrix with one point per column.
enum class KernelFamily { Gaussian, LinearInhomogeneous, PolynomialInhomogeneous };

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double bandwidth = 1.0;  // gamma^2 > 0, Gaussian only
  int degree = 1;          // m >= 1, polynomial only
  double offset = 1.0;     // c >= 0, linear/polynomial

  // k(x,y) = exp(-|x-y|^2 / (2 gamma^2))
  static KernelSpec gaussian(double gamma_squared);
  // k(x,y) = c + <x,y>
  static KernelSpec linear(double offset = 1.0);
  // k(x,y) = (c + <x,y>)^m
  static KernelSpec polynomial(int degree, double offset = 1.0);

  bool operator==(const KernelSpec& other) const;

  // Throws ParameterError on invalid parameters.
  void validate() const;
};

struct GramMatrix {
  Eigen::MatrixXd entries;  // symmetric n x n
  KernelSpec spec;
  Eigen::MatrixXd points;  // d x n, one point per column
};

double evaluate(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y);

GramMatrix gram(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& points);

// |left| x |right| matrix of pairwise evaluations, rows indexing `left`.
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& left,
                           const Eigen::Ref<const Eigen::MatrixXd>& right);

// k(x,x) per column; constant 1 for the Gaussian family.
Eigen::VectorXd kernel_diagonal(const KernelSpec& spec,
                                const Eigen::Ref<const Eigen::MatrixXd>& points);

}  // namespace cmmd

#endif
