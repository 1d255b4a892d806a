#ifndef CMMD_THRESHOLDS_HPP
#define CMMD_THRESHOLDS_HPP

#include <Eigen/Dense>

#include "cmmd/kernels.hpp"
#include "cmmd/regression.hpp"

namespace cmmd {

// Inputs to the analytical confidence multipliers. S bounds the RKHS norm of
// the target, rho is the subgaussian noise scale (convention: a Gaussian with
// standard deviation s is rho = s/sqrt(2)-subgaussian), trace_RV enters the
// time-uniform bound, and trace/hs/op_RG describe the output-space variance
// proxy for the fixed-time bound.
struct ThresholdParams {
  double S = 0.0;
  double rho = 1.0;
  double trace_RV = 1.0;
  double trace_RG = 1.0;
  double hs_RG = 1.0;
  double op_RG = 1.0;
  double delta = 0.1;

  // Throws ParameterError; in particular requires op_RG <= hs_RG <= trace_RG.
  void validate() const;
};

enum class ThresholdSource {
  AnalyticalOnline,
  AnalyticalFixed,
  BootstrapNaive,
  BootstrapWild,
  BootstrapWildResidual,  // residual-studentized wild variant
};

// A calibrated multiplier attached to the model it was calibrated for; the
// pointwise threshold is beta * sigma_{D,lambda}(x).
struct ThresholdModel {
  double beta = 0.0;
  ThresholdSource source = ThresholdSource::AnalyticalFixed;
  FittedModel model;
};

double threshold_at(const ThresholdModel& tm, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd threshold_profile(const ThresholdModel& tm,
                                  const Eigen::Ref<const Eigen::MatrixXd>& xs);

// (1/2) log det(I + K/lambda) via Cholesky of I + K/lambda.
double log_det_term(const GramMatrix& gram, double lambda);

// Time-uniform multiplier:
//   beta = S + (rho/sqrt(lambda)) * sqrt(2 trace_RV (ln(1/delta) + log_det_term))
double beta_online(const ThresholdParams& params, const GramMatrix& gram, double lambda);

struct SpectralNorms {
  double trace = 0.0;
  double hs = 0.0;
  double op = 0.0;
};

// Norms of T = (V+lambda)^{-1/2} K(.,X) (R (x) I) K(.,X)^* (V+lambda)^{-1/2}
// for K = k*id and R = rho^2 * R_G. The eigenvalues of T are the pairwise
// products rho^2 * nu_i * mu_j/(mu_j+lambda) over eigenvalues nu_i of R_G and
// mu_j of the Gram matrix, because K (x) I and I (x) R_G commute; tests gate
// this reduction against a brute-force assembly of T.
SpectralNorms spectral_T_norms(const GramMatrix& gram, double lambda, double rho,
                               double trace_RG, double hs_RG, double op_RG);

// Fixed-time multiplier:
//   beta = S + sqrt(tr T + 2 sqrt(ln(1/delta)) |T|_2 + 2 ln(1/delta) |T|_op) / sqrt(lambda)
double beta_fixed(const ThresholdParams& params, const GramMatrix& gram, double lambda);

}  // namespace cmmd

#endif
