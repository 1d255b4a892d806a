#include "cmmd/dynamics.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "cmmd/calibration.hpp"
#include "cmmd/errors.hpp"
#include "cmmd/statistic.hpp"

namespace cmmd {
namespace {

constexpr std::uint64_t kMonitorStream = 0x6d6f6e69;  // "moni"
constexpr std::uint64_t kPerturbStream = 0x70657274;  // "pert"
constexpr std::uint64_t kSystemStream = 0x73797374;   // "syst"

Eigen::MatrixXd gaussian_matrix(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd out(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) out(i, j) = rng.normal();
  }
  return out;
}

}  // namespace

Eigen::MatrixXd haar_orthonormal(int d, Rng& rng) {
  if (d < 1) throw ParameterError("dimension must be at least 1");
  const Eigen::MatrixXd b = gaussian_matrix(d, d, rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::VectorXd diag = qr.matrixQR().diagonal();
  for (int j = 0; j < d; ++j) {
    if (diag(j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

LinearSystem random_orthonormal_system(int d, double noise_std, std::uint64_t seed) {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ParameterError("noise_std must be finite and nonnegative");
  }
  Rng rng = Rng::derive(seed, {kSystemStream});
  LinearSystem sys;
  sys.dynamics = haar_orthonormal(d, rng);
  sys.noise_std = noise_std;
  sys.initial_state = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  return sys;
}

DataSet simulate_system(const LinearSystem& sys, int steps, std::uint64_t seed) {
  const Eigen::Index d = sys.dynamics.rows();
  if (d < 1 || sys.dynamics.cols() != d) {
    throw ParameterError("dynamics matrix must be square and nonempty");
  }
  if (sys.initial_state.size() != d) {
    throw ParameterError("initial state dimension must match the dynamics matrix");
  }
  if (steps < 1) throw ParameterError("steps must be at least 1");

  Rng rng = Rng::derive(seed, {kSystemStream, 1});
  DataSet data;
  data.covariates.resize(d, steps);
  data.measurements.resize(d, steps);
  Eigen::VectorXd state = sys.initial_state;
  for (int t = 0; t < steps; ++t) {
    data.covariates.col(t) = state;
    Eigen::VectorXd next = sys.dynamics * state;
    for (Eigen::Index i = 0; i < d; ++i) next(i) += sys.noise_std * rng.normal();
    data.measurements.col(t) = next;
    state = next;
  }
  return data;
}

PerturbationResult perturb_dynamics(const Eigen::MatrixXd& A, double xi, std::uint64_t seed) {
  const Eigen::Index d = A.rows();
  if (d < 1 || A.cols() != d) {
    throw ParameterError("dynamics matrix must be square and nonempty");
  }
  if (!(xi >= 0.0) || !std::isfinite(xi)) {
    throw ParameterError("perturbation magnitude must be finite and nonnegative");
  }
  if (xi == 0.0) return {A, 0.0};

  Rng rng = Rng::derive(seed, {kPerturbStream});
  Eigen::MatrixXd H;
  double trace_norm = 0.0;
  constexpr int kMaxAttempts = 50;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Eigen::MatrixXd b = gaussian_matrix(static_cast<int>(d), static_cast<int>(d), rng);
    H = 0.5 * (b - b.transpose());
    trace_norm = Eigen::JacobiSVD<Eigen::MatrixXd>(H).singularValues().sum();
    if (trace_norm > 1e-300) break;
    H.setZero();
  }
  if (!(trace_norm > 1e-300)) {
    throw NumericalError("perturbation direction degenerated to zero repeatedly");
  }

  PerturbationResult result;
  const Eigen::MatrixXd exponent = (xi / trace_norm) * H;
  result.dynamics = A * exponent.exp();
  // Geodesic distance on O(d); equals xi * |H|_HS / |H|_1 while the scaled
  // exponent's spectrum stays below pi, and is reported rather than assumed.
  const Eigen::MatrixXd relative = A.transpose() * result.dynamics;
  result.geodesic_distance = Eigen::MatrixXd(relative.log()).norm();
  return result;
}

void MonitorConfig::validate() const {
  if (dimension < 1) throw ParameterError("dimension must be at least 1");
  if (reference_trajectories < 1) throw ParameterError("reference_trajectories must be at least 1");
  if (reference_length < 1) throw ParameterError("reference_length must be at least 1");
  if (window < 1) throw ParameterError("window must be at least 1");
  if (total_steps < 1) throw ParameterError("total_steps must be at least 1");
  if (change_step < 1 || change_step > total_steps) {
    throw ParameterError("change_step must lie within the monitored trajectory");
  }
  if (!(perturbation >= 0.0) || !std::isfinite(perturbation)) {
    throw ParameterError("perturbation must be finite and nonnegative");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ParameterError("noise_std must be finite and nonnegative");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("lambda must be finite and positive");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (replicates < 1) throw ParameterError("replicates must be at least 1");
  if (threads < 1) throw ParameterError("threads must be at least 1");
  if (!(threshold_scale > 0.0) || !std::isfinite(threshold_scale)) {
    throw ParameterError("threshold_scale must be finite and positive");
  }
}

std::vector<MonitorRecord> monitor(const MonitorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const KernelSpec lin = KernelSpec::linear(0.0);
  const int d = cfg.dimension;

  const LinearSystem sys =
      random_orthonormal_system(d, cfg.noise_std, Rng::mix(seed, {kMonitorStream, 0}));

  const int ref_n = cfg.reference_trajectories * cfg.reference_length;
  DataSet reference;
  reference.covariates.resize(d, ref_n);
  reference.measurements.resize(d, ref_n);
  for (int i = 0; i < cfg.reference_trajectories; ++i) {
    const DataSet traj =
        simulate_system(sys, cfg.reference_length, Rng::mix(seed, {kMonitorStream, 1, static_cast<std::uint64_t>(i)}));
    reference.covariates.middleCols(i * cfg.reference_length, cfg.reference_length) =
        traj.covariates;
    reference.measurements.middleCols(i * cfg.reference_length, cfg.reference_length) =
        traj.measurements;
  }
  const FittedModel ref_model = fit(reference, lin, cfg.lambda, lin);
  const WildCalibrator ref_cal(ref_model);

  const PerturbationResult perturbed =
      perturb_dynamics(sys.dynamics, cfg.perturbation, Rng::mix(seed, {kMonitorStream, 2}));

  // Per-step state: the full monitored trajectory plus per-covariate cached
  // reference-side columns, so each step pays one triangular solve of the
  // big reference system instead of a window's worth.
  Eigen::MatrixXd cov_all(d, cfg.total_steps);
  Eigen::MatrixXd meas_all(d, cfg.total_steps);
  Eigen::MatrixXd cross_all(ref_n, cfg.total_steps);
  Eigen::MatrixXd solved_all(ref_n, cfg.total_steps);
  Eigen::VectorXd kdiag_all(cfg.total_steps);

  Rng traj_rng = Rng::derive(seed, {kMonitorStream, 3});
  Eigen::VectorXd state = sys.initial_state;
  std::vector<MonitorRecord> records;
  records.reserve(cfg.total_steps);

  for (int t = 1; t <= cfg.total_steps; ++t) {
    const Eigen::MatrixXd& a_t = t <= cfg.change_step ? sys.dynamics : perturbed.dynamics;
    Eigen::VectorXd next = a_t * state;
    for (int i = 0; i < d; ++i) next(i) += cfg.noise_std * traj_rng.normal();

    const int col = t - 1;
    cov_all.col(col) = state;
    meas_all.col(col) = next;
    cross_all.col(col) = cross_gram(lin, reference.covariates, state);
    solved_all.col(col) = cross_all.col(col);
    auto solved_col = solved_all.middleCols(col, 1);
    cholesky_solve_in_place(ref_model.chol, solved_col);
    kdiag_all(col) = kernel_diagonal(lin, state)(0);
    state = next;

    const int w = std::min(t, cfg.window);
    const int start = t - w;
    const auto grid = cov_all.middleCols(start, w);
    const auto cross = cross_all.middleCols(start, w);
    const auto solved = solved_all.middleCols(start, w);
    const auto kdiag = kdiag_all.segment(start, w);

    DataSet window_data;
    window_data.covariates = grid;
    window_data.measurements = meas_all.middleCols(start, w);
    const FittedModel win_model = fit(window_data, lin, cfg.lambda, lin);
    const WildCalibrator win_cal(win_model);

    BootstrapConfig bc;
    bc.replicates = cfg.replicates;
    bc.alpha = cfg.alpha;
    bc.split = 0.5;
    bc.threads = cfg.threads;
    bc.role = QuantileRole::First;
    bc.seed = Rng::mix(seed, {kMonitorStream, 4, static_cast<std::uint64_t>(t), 1});
    const CalibrationResult cal_ref = ref_cal.run_presolved(cross, solved, kdiag, bc);
    bc.role = QuantileRole::Second;
    bc.seed = Rng::mix(seed, {kMonitorStream, 4, static_cast<std::uint64_t>(t), 2});
    const CalibrationResult cal_win = win_cal.run(grid, bc);

    const Eigen::VectorXd sigma_ref =
        (kdiag.array() - (cross.array() * solved.array()).colwise().sum().transpose())
            .max(0.0)
            .sqrt()
            .matrix();
    const Eigen::VectorXd sigma_win = posterior_scale_profile(win_model, grid);

    // Discrepancy through one joint low-rank measurement factor: columns of
    // both measurement sets share the embedding, so the profile is a plain
    // Euclidean norm in rank-r coordinates (rank <= d+1 for linear kappa).
    Eigen::MatrixXd joint(d, ref_n + w);
    joint << reference.measurements, window_data.measurements;
    const LowRankFactor factor = measurement_factor(lin, joint);
    const Eigen::MatrixXd win_duals = dual_coefficients_batch(win_model, grid);
    const Eigen::MatrixXd embedded = factor.factor.leftCols(ref_n) * solved -
                                     factor.factor.rightCols(w) * win_duals;

    MonitorRecord rec;
    rec.step = t;
    rec.warmup = t < cfg.window;
    double max_ratio = 0.0;
    double sum_ratio = 0.0;
    for (int j = 0; j < w; ++j) {
      const double stat = embedded.col(j).norm();
      const double threshold =
          cfg.threshold_scale * (cal_ref.beta * sigma_ref(j) + cal_win.beta * sigma_win(j));
      const double ratio = detail::grid_ratio(stat, threshold, j);
      max_ratio = std::max(max_ratio, ratio);
      sum_ratio += ratio;
    }
    rec.max_ratio = max_ratio;
    rec.mean_ratio = sum_ratio / w;
    rec.mean_reference_scale = sigma_ref.mean();
    records.push_back(rec);
  }
  return records;
}

}  // namespace cmmd
