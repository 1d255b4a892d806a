#ifndef CMMD_CALIBRATION_HPP
#define CMMD_CALIBRATION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "cmmd/regression.hpp"

namespace cmmd {

// Which of the two split-quantile levels this calibration run targets:
// 1 - alpha*t for the first data set, 1 - alpha*(1-t) for the second.
enum class QuantileRole { First, Second };

// Denominator of the wild-bootstrap ratio: the posterior scale sigma(x), or
// the residual-weighted scale of the Singh-style variant.
enum class WildStudentizer { Posterior, Residual };

struct BootstrapConfig {
  int replicates = 500;   // M
  double alpha = 0.05;
  double split = 0.5;     // t
  Eigen::MatrixXd grid;   // d x J calibration points; empty = data covariates
  std::uint64_t seed = 0;
  QuantileRole role = QuantileRole::First;
  WildStudentizer studentizer = WildStudentizer::Posterior;
  int threads = 1;

  void validate() const;  // throws ParameterError
  double quantile_level() const;
};

struct CalibrationResult {
  double beta = 0.0;
  std::vector<double> replicate_stats;  // the B-bar values, one per replicate
  double quantile_level = 0.0;
};

// (1 - alpha*t, 1 - alpha*(1-t)); throws ParameterError outside (0,1).
std::pair<double, double> split_quantiles(double alpha, double t);

// Upper empirical quantile, ceiling-index convention: sorted ascending, the
// value at 1-based index ceil(level * M), clamped to [1, M].
double empirical_quantile(const std::vector<double>& stats, double level);

// Resampling bootstrap: per replicate draws two with-replacement resamples of
// the data, fits both, and records the max over the grid of
// CMMD(x) / (sigma(x) + sigma'(x)); beta is the quantile of those maxima.
CalibrationResult naive_bootstrap(const DataSet& data, const KernelSpec& k,
                                  const KernelSpec& kappa, double lambda,
                                  const BootstrapConfig& cfg);

// Multiplier bootstrap around a single fit: per replicate draws
// q ~ N(0, I - 11'/n) and records the max over the grid of
// sqrt(xi' (I-A)' L (I-A) xi) / sigma(x) with xi = q .* v_x,
// v_x = (K+lambda I)^{-1} k(X,x), A = (K+lambda I)^{-1} K, and L the
// kappa-Gram of the measurements. Performs exactly one ridge factorization.
CalibrationResult wild_bootstrap(const DataSet& data, const KernelSpec& k,
                                 const KernelSpec& kappa, double lambda,
                                 const BootstrapConfig& cfg);

// Residual-weighted scale of the Singh-style wild variant:
//   sigma~(x)^2 = sum_j v_x,j^2 * |eps_j|^2,  |eps_j|^2 = [(I-A)' L (I-A)]_jj.
// Thresholds from WildStudentizer::Residual calibrations pair with this scale.
Eigen::VectorXd residual_scale_profile(const FittedModel& model,
                                       const Eigen::Ref<const Eigen::MatrixXd>& xs);

// Reusable wild-bootstrap engine around one fitted model, for callers that
// recalibrate repeatedly over moving grids (the process monitor). The model
// must outlive the calibrator.
class WildCalibrator {
 public:
  explicit WildCalibrator(const FittedModel& model);

  CalibrationResult run(const Eigen::Ref<const Eigen::MatrixXd>& grid,
                        const BootstrapConfig& cfg) const;

  // Variant taking precomputed grid columns: cross = k(X, grid), solved =
  // (K+lambda I)^{-1} cross, kernel_diag = k(x,x) over the grid. Lets a
  // sliding-window caller cache one solve per new grid point.
  CalibrationResult run_presolved(const Eigen::Ref<const Eigen::MatrixXd>& cross,
                                  const Eigen::Ref<const Eigen::MatrixXd>& solved,
                                  const Eigen::Ref<const Eigen::VectorXd>& kernel_diag,
                                  const BootstrapConfig& cfg) const;

  // P(I - A), the residual map in low-rank output coordinates.
  const Eigen::MatrixXd& residual_factor() const { return residual_factor_; }

 private:
  const FittedModel* model_;
  Eigen::MatrixXd residual_factor_;   // r x n
  Eigen::VectorXd residual_sq_norms_; // n, squared column norms of the above
};

namespace detail {

// The wild multiplier vector q = g - mean(g) of one replicate, exposed so the
// sampler's covariance (I - 11'/n) is testable against the production draws.
Eigen::VectorXd wild_multiplier(std::uint64_t seed, int replicate, Eigen::Index n);

// Ratio rule shared by both bootstrap flavors. A denominator below 1e-12 with
// a matching near-zero numerator contributes 0; with a larger numerator the
// grid point cannot be calibrated and a CalibrationError is thrown.
double grid_ratio(double numerator, double denominator, Eigen::Index grid_index);

// A with-replacement resample fitted in compressed form over its distinct
// indices: with expansion matrix E (resample row -> distinct index), counts
// C = E'E, and W = C^{1/2}, the resample's ridge system E K_u E' + lambda I
// reduces to the |u| x |u| system M = W K_u W + lambda I via the push-through
// identity (lambda I + E K_u E')^{-1} E = E W^{-1} M^{-1} W.
struct ResampleFit {
  std::vector<int> unique_indices;  // ascending
  Eigen::VectorXd sqrt_counts;      // w, aligned with unique_indices
  Eigen::MatrixXd chol;             // lower factor of W K_u W + lambda I
};

ResampleFit compressed_fit(const Eigen::MatrixXd& gram_full, const std::vector<int>& draws,
                           double lambda);

// Posterior scales and grouped dual weights of the compressed fit over grid
// columns: sigma_j = sqrt(max(0, kdiag_j - g_j' M^{-1} g_j)) with
// g_j = W k_u(x_j), and weights column j = W M^{-1} g_j, which are the
// per-distinct-index sums of the resample's dual coefficients. cross_full is
// k(X, grid) over the original data.
void compressed_query(const ResampleFit& rf, const Eigen::MatrixXd& cross_full,
                      const Eigen::VectorXd& kernel_diag, Eigen::VectorXd& sigmas,
                      Eigen::MatrixXd& weights);

}  // namespace detail

}  // namespace cmmd

#endif
