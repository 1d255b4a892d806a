#include "cmmd/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmmd/errors.hpp"
#include "cmmd/linalg.hpp"
#include "cmmd/parallel.hpp"
#include "cmmd/rng.hpp"
#include "cmmd/statistic.hpp"

namespace cmmd {

namespace {

// Substream tags, so the two bootstrap flavors never share draws even under
// identical seeds.
constexpr std::uint64_t kNaiveStream = 0x6e61697665ull;
constexpr std::uint64_t kWildStream = 0x77696c64ull;

constexpr double kDegenerateScale = 1e-12;

const Eigen::MatrixXd& grid_or_default(const BootstrapConfig& cfg, const DataSet& data) {
  if (cfg.grid.cols() > 0) return cfg.grid;
  return data.covariates;
}

void check_bootstrap_inputs(const DataSet& data, double lambda, const BootstrapConfig& cfg) {
  cfg.validate();
  data.validate();
  if (data.size() < 2)
    throw InputError("bootstrap calibration needs at least 2 samples, got " +
                     std::to_string(data.size()));
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ParameterError("ridge regularization must be a positive finite number");
}

}  // namespace

void BootstrapConfig::validate() const {
  if (replicates < 1) throw ParameterError("bootstrap needs at least one replicate");
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw ParameterError("bootstrap level alpha must lie in (0,1)");
  if (!(split > 0.0) || !(split < 1.0))
    throw ParameterError("quantile split t must lie in (0,1)");
  if (threads < 1) throw ParameterError("thread count must be at least 1");
  if (grid.cols() > 0 && !grid.allFinite())
    throw InputError("calibration grid contains non-finite entries");
}

double BootstrapConfig::quantile_level() const {
  auto levels = split_quantiles(alpha, split);
  return role == QuantileRole::First ? levels.first : levels.second;
}

std::pair<double, double> split_quantiles(double alpha, double t) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw ParameterError("level alpha must lie in (0,1)");
  if (!(t > 0.0) || !(t < 1.0)) throw ParameterError("quantile split t must lie in (0,1)");
  return {1.0 - alpha * t, 1.0 - alpha * (1.0 - t)};
}

double empirical_quantile(const std::vector<double>& stats, double level) {
  if (stats.empty()) throw ParameterError("empirical quantile of an empty sample");
  if (!(level > 0.0) || !(level < 1.0))
    throw ParameterError("quantile level must lie in (0,1)");
  std::vector<double> sorted(stats);
  std::sort(sorted.begin(), sorted.end());
  // Smallest 1-based index >= level * M; the small slack keeps an exactly
  // integral target (e.g. 0.75 * 4) from being pushed up by rounding.
  const double target = level * static_cast<double>(sorted.size());
  auto index = static_cast<std::size_t>(std::ceil(target - 1e-9));
  index = std::min(std::max<std::size_t>(index, 1), sorted.size());
  return sorted[index - 1];
}

namespace detail {

Eigen::VectorXd wild_multiplier(std::uint64_t seed, int replicate, Eigen::Index n) {
  // q = g - mean(g) with g i.i.d. standard normal has covariance exactly
  // I - 11'/n, without a covariance factorization.
  Rng rng(Rng::derive(seed, {kWildStream, static_cast<std::uint64_t>(replicate)}));
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = rng.normal();
  q.array() -= q.mean();
  return q;
}

double grid_ratio(double numerator, double denominator, Eigen::Index grid_index) {
  if (denominator < kDegenerateScale) {
    if (numerator < kDegenerateScale) return 0.0;
    throw CalibrationError("grid point " + std::to_string(grid_index) +
                           " has a vanishing scale but a nonzero statistic; the "
                           "level cannot be calibrated there");
  }
  return numerator / denominator;
}

ResampleFit compressed_fit(const Eigen::MatrixXd& gram_full, const std::vector<int>& draws,
                           double lambda) {
  const auto n = static_cast<int>(gram_full.rows());
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (int i : draws) ++counts[static_cast<std::size_t>(i)];

  ResampleFit rf;
  rf.unique_indices.reserve(draws.size());
  for (int i = 0; i < n; ++i)
    if (counts[static_cast<std::size_t>(i)] > 0) rf.unique_indices.push_back(i);

  const auto u = static_cast<Eigen::Index>(rf.unique_indices.size());
  rf.sqrt_counts.resize(u);
  for (Eigen::Index j = 0; j < u; ++j)
    rf.sqrt_counts(j) = std::sqrt(
        static_cast<double>(counts[static_cast<std::size_t>(rf.unique_indices[j])]));

  rf.chol = gram_full(rf.unique_indices, rf.unique_indices);
  rf.chol = rf.sqrt_counts.asDiagonal() * rf.chol * rf.sqrt_counts.asDiagonal();
  rf.chol.diagonal().array() += lambda;
  cholesky_in_place(rf.chol, "resampled ridge system");
  return rf;
}

void compressed_query(const ResampleFit& rf, const Eigen::MatrixXd& cross_full,
                      const Eigen::VectorXd& kernel_diag, Eigen::VectorXd& sigmas,
                      Eigen::MatrixXd& weights) {
  Eigen::MatrixXd g = rf.sqrt_counts.asDiagonal() * cross_full(rf.unique_indices, Eigen::all);
  weights = g;
  cholesky_solve_in_place(rf.chol, weights);
  sigmas = (kernel_diag - (g.cwiseProduct(weights)).colwise().sum().transpose())
               .cwiseMax(0.0)
               .cwiseSqrt();
  weights = rf.sqrt_counts.asDiagonal() * weights;
}

}  // namespace detail

CalibrationResult naive_bootstrap(const DataSet& data, const KernelSpec& k,
                                  const KernelSpec& kappa, double lambda,
                                  const BootstrapConfig& cfg) {
  check_bootstrap_inputs(data, lambda, cfg);
  const Eigen::MatrixXd& grid = grid_or_default(cfg, data);
  if (grid.cols() == 0) throw ParameterError("calibration grid is empty");

  const auto n = static_cast<int>(data.size());
  const Eigen::MatrixXd gram_full = gram(k, data.covariates).entries;
  const Eigen::MatrixXd cross_full = cross_gram(k, data.covariates, grid);
  const Eigen::VectorXd kdiag = kernel_diagonal(k, grid);
  const Eigen::MatrixXd factor =
      measurement_factor(kappa, data.measurements).factor;  // r x n

  CalibrationResult result;
  result.quantile_level = cfg.quantile_level();
  result.replicate_stats.assign(static_cast<std::size_t>(cfg.replicates), 0.0);

  parallel_for(cfg.replicates, cfg.threads, [&](Eigen::Index m) {
    Rng rng(Rng::derive(cfg.seed, {kNaiveStream, static_cast<std::uint64_t>(m)}));
    std::vector<int> draws1(static_cast<std::size_t>(n));
    std::vector<int> draws2(static_cast<std::size_t>(n));
    for (auto& d : draws1) d = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    for (auto& d : draws2) d = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));

    detail::ResampleFit fit1 = detail::compressed_fit(gram_full, draws1, lambda);
    detail::ResampleFit fit2 = detail::compressed_fit(gram_full, draws2, lambda);

    Eigen::VectorXd sigma1, sigma2;
    Eigen::MatrixXd weights1, weights2;
    detail::compressed_query(fit1, cross_full, kdiag, sigma1, weights1);
    detail::compressed_query(fit2, cross_full, kdiag, sigma2, weights2);

    Eigen::MatrixXd embedded = factor(Eigen::all, fit1.unique_indices) * weights1 -
                               factor(Eigen::all, fit2.unique_indices) * weights2;
    double best = 0.0;
    for (Eigen::Index j = 0; j < grid.cols(); ++j)
      best = std::max(best,
                      detail::grid_ratio(embedded.col(j).norm(), sigma1(j) + sigma2(j), j));
    result.replicate_stats[static_cast<std::size_t>(m)] = best;
  });

  result.beta = empirical_quantile(result.replicate_stats, result.quantile_level);
  return result;
}

WildCalibrator::WildCalibrator(const FittedModel& model) : model_(&model) {
  const Eigen::MatrixXd factor =
      measurement_factor(model.output_spec, model.dual_targets).factor;  // r x n
  // residual factor = P (I - A) = P - (P (K+lambda I)^{-1}) K, computed with
  // the fit's existing factorization; no new Cholesky happens here.
  Eigen::MatrixXd solved = factor.transpose();  // n x r
  cholesky_solve_in_place(model.chol, solved);
  const Eigen::MatrixXd gram_full = gram(model.input_spec, model.train_covariates).entries;
  residual_factor_ = factor - (solved.transpose() * gram_full);
  residual_sq_norms_ = residual_factor_.colwise().squaredNorm().transpose();
}

CalibrationResult WildCalibrator::run(const Eigen::Ref<const Eigen::MatrixXd>& grid,
                                      const BootstrapConfig& cfg) const {
  if (grid.cols() == 0) throw ParameterError("calibration grid is empty");
  Eigen::MatrixXd cross = cross_gram(model_->input_spec, model_->train_covariates, grid);
  Eigen::MatrixXd solved = cross;
  cholesky_solve_in_place(model_->chol, solved);
  return run_presolved(cross, solved, kernel_diagonal(model_->input_spec, grid), cfg);
}

CalibrationResult WildCalibrator::run_presolved(
    const Eigen::Ref<const Eigen::MatrixXd>& cross,
    const Eigen::Ref<const Eigen::MatrixXd>& solved,
    const Eigen::Ref<const Eigen::VectorXd>& kernel_diag,
    const BootstrapConfig& cfg) const {
  cfg.validate();
  const Eigen::Index n = model_->size();
  const Eigen::Index grid_size = cross.cols();
  const int m_reps = cfg.replicates;
  if (grid_size == 0) throw ParameterError("calibration grid is empty");
  // A single-sample model is allowed here (the process monitor's first window
  // step): its centered multipliers are identically zero, so the side
  // calibrates to beta = 0 and contributes nothing to the threshold.
  if (n < 1) throw InputError("bootstrap calibration needs a fitted sample");

  Eigen::VectorXd scales(grid_size);
  if (cfg.studentizer == WildStudentizer::Posterior) {
    scales = (kernel_diag - (cross.cwiseProduct(solved)).colwise().sum().transpose())
                 .cwiseMax(0.0)
                 .cwiseSqrt();
  } else {
    scales = (solved.array().square().colwise() * residual_sq_norms_.array())
                 .colwise()
                 .sum()
                 .transpose()
                 .sqrt()
                 .matrix();
  }

  Eigen::MatrixXd multipliers(n, m_reps);
  for (int m = 0; m < m_reps; ++m) {
    multipliers.col(m) = detail::wild_multiplier(cfg.seed, m, n);
  }

  // ratios(m, j) = |residual_factor * (v_{x_j} .* q_m)| / scale_j
  Eigen::MatrixXd ratios(m_reps, grid_size);
  parallel_for(grid_size, cfg.threads, [&](Eigen::Index j) {
    Eigen::MatrixXd perturbed =
        (residual_factor_ * solved.col(j).asDiagonal()) * multipliers;  // r x M
    Eigen::VectorXd norms = perturbed.colwise().norm().transpose();
    for (int m = 0; m < m_reps; ++m)
      ratios(m, j) = detail::grid_ratio(norms(m), scales(j), j);
  });

  CalibrationResult result;
  result.quantile_level = cfg.quantile_level();
  result.replicate_stats.resize(static_cast<std::size_t>(m_reps));
  for (int m = 0; m < m_reps; ++m)
    result.replicate_stats[static_cast<std::size_t>(m)] = ratios.row(m).maxCoeff();
  result.beta = empirical_quantile(result.replicate_stats, result.quantile_level);
  return result;
}

CalibrationResult wild_bootstrap(const DataSet& data, const KernelSpec& k,
                                 const KernelSpec& kappa, double lambda,
                                 const BootstrapConfig& cfg) {
  check_bootstrap_inputs(data, lambda, cfg);
  FittedModel model = fit(data, k, lambda, kappa);
  WildCalibrator calibrator(model);
  return calibrator.run(grid_or_default(cfg, data), cfg);
}

Eigen::VectorXd residual_scale_profile(const FittedModel& model,
                                       const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  WildCalibrator calibrator(model);
  Eigen::MatrixXd solved = cross_gram(model.input_spec, model.train_covariates, xs);
  cholesky_solve_in_place(model.chol, solved);
  const Eigen::VectorXd sq_norms =
      calibrator.residual_factor().colwise().squaredNorm().transpose();
  return (solved.array().square().colwise() * sq_norms.array())
      .colwise()
      .sum()
      .transpose()
      .sqrt()
      .matrix();
}

}  // namespace cmmd
