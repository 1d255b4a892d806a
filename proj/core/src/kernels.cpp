#include "cmmd/kernels.hpp"

#include <cmath>

#include "cmmd/errors.hpp"

namespace cmmd {

KernelSpec KernelSpec::gaussian(double gamma_squared) {
  KernelSpec spec;
  spec.family = KernelFamily::Gaussian;
  spec.bandwidth = gamma_squared;
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::linear(double offset) {
  KernelSpec spec;
  spec.family = KernelFamily::LinearInhomogeneous;
  spec.offset = offset;
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
  KernelSpec spec;
  spec.family = KernelFamily::PolynomialInhomogeneous;
  spec.degree = degree;
  spec.offset = offset;
  spec.validate();
  return spec;
}

bool KernelSpec::operator==(const KernelSpec& other) const {
  if (family != other.family) return false;
  switch (family) {
    case KernelFamily::Gaussian:
      return bandwidth == other.bandwidth;
    case KernelFamily::LinearInhomogeneous:
      return offset == other.offset;
    case KernelFamily::PolynomialInhomogeneous:
      return degree == other.degree && offset == other.offset;
  }
  return false;
}

void KernelSpec::validate() const {
  switch (family) {
    case KernelFamily::Gaussian:
      if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
        throw ParameterError("kernel bandwidth must be a positive finite number");
      break;
    case KernelFamily::PolynomialInhomogeneous:
      if (degree < 1) throw ParameterError("polynomial kernel degree must be at least 1");
      [[fallthrough]];
    case KernelFamily::LinearInhomogeneous:
      if (!(offset >= 0.0) || !std::isfinite(offset))
        throw ParameterError("kernel offset must be a nonnegative finite number");
      break;
  }
}

double evaluate(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y) {
  spec.validate();
  if (x.size() != y.size())
    throw InputError("kernel arguments have mismatched dimensions");
  switch (spec.family) {
    case KernelFamily::Gaussian:
      return std::exp(-(x - y).squaredNorm() / (2.0 * spec.bandwidth));
    case KernelFamily::LinearInhomogeneous:
      return spec.offset + x.dot(y);
    case KernelFamily::PolynomialInhomogeneous:
      return std::pow(spec.offset + x.dot(y), spec.degree);
  }
  throw ParameterError("unknown kernel family");
}

namespace {

// Applies the scalar profile to an inner-product (or squared-distance) block.
void finish_from_products(const KernelSpec& spec, const Eigen::VectorXd& left_sq,
                          const Eigen::VectorXd& right_sq, Eigen::MatrixXd& products) {
  switch (spec.family) {
    case KernelFamily::Gaussian: {
      Eigen::MatrixXd dist2 = (-2.0 * products).eval();
      dist2.colwise() += left_sq;
      dist2.rowwise() += right_sq.transpose();
      dist2 = dist2.cwiseMax(0.0);
      products = (-dist2 / (2.0 * spec.bandwidth)).array().exp();
      break;
    }
    case KernelFamily::LinearInhomogeneous:
      products.array() += spec.offset;
      break;
    case KernelFamily::PolynomialInhomogeneous:
      products = (products.array() + spec.offset).pow(spec.degree);
      break;
  }
}

}  // namespace

GramMatrix gram(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& points) {
  spec.validate();
  const Eigen::Index n = points.cols();
  GramMatrix result;
  result.spec = spec;
  result.points = points;
  // rankUpdate gives an exactly symmetric product, so the Gram matrix is
  // symmetric by construction rather than up to rounding.
  Eigen::MatrixXd products = Eigen::MatrixXd::Zero(n, n);
  products.selfadjointView<Eigen::Lower>().rankUpdate(points.transpose());
  products.triangularView<Eigen::StrictlyUpper>() =
      products.triangularView<Eigen::StrictlyLower>().transpose();
  if (spec.family == KernelFamily::Gaussian) {
    Eigen::VectorXd sq = products.diagonal();
    finish_from_products(spec, sq, sq, products);
    products.diagonal().setOnes();
  } else {
    finish_from_products(spec, Eigen::VectorXd(), Eigen::VectorXd(), products);
  }
  result.entries = std::move(products);
  return result;
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& left,
                           const Eigen::Ref<const Eigen::MatrixXd>& right) {
  spec.validate();
  if (left.cols() > 0 && right.cols() > 0 && left.rows() != right.rows())
    throw InputError("cross-evaluated point sets have mismatched dimensions");
  if (left.cols() == 0 || right.cols() == 0)
    return Eigen::MatrixXd(left.cols(), right.cols());
  Eigen::MatrixXd products = left.transpose() * right;
  if (spec.family == KernelFamily::Gaussian) {
    Eigen::VectorXd left_sq = left.colwise().squaredNorm();
    Eigen::VectorXd right_sq = right.colwise().squaredNorm();
    finish_from_products(spec, left_sq, right_sq, products);
  } else {
    finish_from_products(spec, Eigen::VectorXd(), Eigen::VectorXd(), products);
  }
  return products;
}

Eigen::VectorXd kernel_diagonal(const KernelSpec& spec,
                                const Eigen::Ref<const Eigen::MatrixXd>& points) {
  spec.validate();
  const Eigen::Index n = points.cols();
  if (spec.family == KernelFamily::Gaussian) return Eigen::VectorXd::Ones(n);
  Eigen::VectorXd sq = points.colwise().squaredNorm().transpose();
  if (spec.family == KernelFamily::LinearInhomogeneous)
    return (sq.array() + spec.offset).matrix();
  return (sq.array() + spec.offset).pow(spec.degree).matrix();
}

}  // namespace cmmd
