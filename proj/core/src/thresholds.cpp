#include "cmmd/thresholds.hpp"

#include <cmath>

#include "cmmd/errors.hpp"
#include "cmmd/linalg.hpp"

namespace cmmd {

void ThresholdParams::validate() const {
  if (!(delta > 0.0) || !(delta < 1.0))
    throw ParameterError("confidence budget delta must lie in (0,1)");
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw ParameterError("subgaussian scale rho must be positive");
  if (!(S >= 0.0) || !std::isfinite(S))
    throw ParameterError("norm bound S must be nonnegative");
  if (!(trace_RV > 0.0) || !std::isfinite(trace_RV))
    throw ParameterError("trace_RV must be positive");
  if (!(trace_RG >= 0.0) || !(hs_RG >= 0.0) || !(op_RG >= 0.0))
    throw ParameterError("variance-proxy norms must be nonnegative");
  if (op_RG > hs_RG || hs_RG > trace_RG)
    throw ParameterError("variance-proxy norms must satisfy op <= hs <= trace");
}

double threshold_at(const ThresholdModel& tm, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return tm.beta * posterior_scale(tm.model, x);
}

Eigen::VectorXd threshold_profile(const ThresholdModel& tm,
                                  const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  return tm.beta * posterior_scale_profile(tm.model, xs);
}

double log_det_term(const GramMatrix& gram, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ParameterError("lambda must be a positive finite number");
  const Eigen::Index n = gram.entries.rows();
  if (n == 0) return 0.0;
  Eigen::MatrixXd scaled = gram.entries / lambda;
  scaled.diagonal().array() += 1.0;
  cholesky_in_place(scaled, "log-determinant system");
  return scaled.diagonal().array().log().sum();
}

double beta_online(const ThresholdParams& params, const GramMatrix& gram, double lambda) {
  params.validate();
  const double tail = std::log(1.0 / params.delta) + log_det_term(gram, lambda);
  return params.S +
         params.rho / std::sqrt(lambda) * std::sqrt(2.0 * params.trace_RV * tail);
}

SpectralNorms spectral_T_norms(const GramMatrix& gram, double lambda, double rho,
                               double trace_RG, double hs_RG, double op_RG) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ParameterError("lambda must be a positive finite number");
  SpectralNorms norms;
  const Eigen::Index n = gram.entries.rows();
  if (n == 0) return norms;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram.entries,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the Gram matrix failed");
  Eigen::ArrayXd mu = solver.eigenvalues().array().max(0.0);
  Eigen::ArrayXd ratios = mu / (mu + lambda);
  const double rho2 = rho * rho;
  norms.trace = rho2 * trace_RG * ratios.sum();
  norms.hs = rho2 * hs_RG * std::sqrt(ratios.square().sum());
  norms.op = rho2 * op_RG * ratios.maxCoeff();
  return norms;
}

double beta_fixed(const ThresholdParams& params, const GramMatrix& gram, double lambda) {
  params.validate();
  SpectralNorms norms = spectral_T_norms(gram, lambda, params.rho, params.trace_RG,
                                         params.hs_RG, params.op_RG);
  const double log_term = std::log(1.0 / params.delta);
  return params.S + std::sqrt(norms.trace + 2.0 * std::sqrt(log_term) * norms.hs +
                              2.0 * log_term * norms.op) /
                        std::sqrt(lambda);
}

}  // namespace cmmd
