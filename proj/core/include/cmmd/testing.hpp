#ifndef CMMD_TESTING_HPP
#define CMMD_TESTING_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "cmmd/calibration.hpp"
#include "cmmd/regression.hpp"
#include "cmmd/thresholds.hpp"

namespace cmmd {

struct TestRecord {
  Eigen::VectorXd x;
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;
};

struct TestReport {
  std::vector<TestRecord> records;
  std::vector<int> rejection_region;  // indices into records with reject = true

  bool any_rejection() const { return !rejection_region.empty(); }
};

// The per-covariate decision: reject at x iff
//   CMMD(x) > beta1 * scale1(x) + beta2 * scale2(x)   (strict inequality),
// where scale_i is the posterior scale of the threshold's attached model, or
// the residual scale for a BootstrapWildResidual threshold.
TestReport run_test(const FittedModel& model1, const FittedModel& model2,
                    const ThresholdModel& thr1, const ThresholdModel& thr2,
                    const Eigen::Ref<const Eigen::MatrixXd>& xs);

enum class TestRegime { NullRegime, AlternativeRegime };

struct ErrorEstimate {
  double positive_rate = 0.0;
  int trials = 0;
  TestRegime regime = TestRegime::NullRegime;

  // Empirical type I error under the null regime; under the alternative the
  // type II error is 1 - positive_rate.
  double type_one_error() const { return positive_rate; }
  double type_two_error() const { return 1.0 - positive_rate; }
};

// Everything one Monte Carlo trial needs besides the data: kernels, ridge
// strength, and how thresholds are produced. For the analytical sources the
// per-side confidence budgets are delta1 = alpha*split and
// delta2 = alpha*(1-split), mirroring the bootstrap's quantile split; the
// remaining ThresholdParams fields come from `params`.
struct PipelineConfig {
  KernelSpec input_spec;
  KernelSpec output_spec;
  double lambda = 0.1;
  ThresholdSource source = ThresholdSource::BootstrapNaive;
  int replicates = 500;
  double alpha = 0.05;
  double split = 0.5;
  ThresholdParams params;  // S, rho, trace_RV, *_RG for analytical sources
  std::uint64_t seed = 0;
  int threads = 1;
};

// Produces the data-set pair for one trial; must be deterministic in the
// trial index (all randomness keyed on it).
using TrialGenerator = std::function<std::pair<DataSet, DataSet>(int trial)>;

// Runs `trials` seeded trials: generate a pair, fit both sides, calibrate
// per the config, test at the union of observed covariates, and score 1 iff
// the rejection region is nonempty.
ErrorEstimate positive_rate(const TrialGenerator& generator, const PipelineConfig& cfg,
                            int trials, TestRegime regime);

// Same trials scored at several levels at once. Bootstrap replicate statistics
// do not depend on alpha, so each trial is calibrated once and re-quantiled
// per level; element i matches positive_rate with alpha = alphas[i].
std::vector<ErrorEstimate> positive_rate_sweep(const TrialGenerator& generator,
                                               const PipelineConfig& cfg, int trials,
                                               const std::vector<double>& alphas,
                                               TestRegime regime);

// Splits tested covariates by decision quality against a ground-truth oracle;
// truth(i) says whether the null actually holds at record i. Returns
// (type I indices: rejected where true, type II indices: kept where false).
std::pair<std::vector<int>, std::vector<int>> error_regions(
    const std::function<bool(int)>& truth, const TestReport& report);

}  // namespace cmmd

#endif
