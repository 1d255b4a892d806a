#include "cmmd/testing.hpp"

#include <cmath>
#include <string>

#include "cmmd/errors.hpp"
#include "cmmd/parallel.hpp"
#include "cmmd/rng.hpp"
#include "cmmd/statistic.hpp"

namespace cmmd {

namespace {

constexpr std::uint64_t kTrialStream = 0x747269616cull;

Eigen::VectorXd scale_profile(const ThresholdModel& thr,
                              const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  if (thr.source == ThresholdSource::BootstrapWildResidual)
    return residual_scale_profile(thr.model, xs);
  return posterior_scale_profile(thr.model, xs);
}

// Rethrows any of the library's error types with the trial index prepended,
// so a failing Monte Carlo run names the culprit.
template <typename Fn>
auto with_trial_context(int trial, Fn&& fn) -> decltype(fn()) {
  const std::string prefix = "trial " + std::to_string(trial) + ": ";
  try {
    return fn();
  } catch (const InputError& e) {
    throw InputError(prefix + e.what());
  } catch (const ParameterError& e) {
    throw ParameterError(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const CalibrationError& e) {
    throw CalibrationError(prefix + e.what());
  } catch (const MisuseError& e) {
    throw MisuseError(prefix + e.what());
  }
}

struct TrialScorer {
  // beta factories per level, sharing whatever the source lets them share
  std::vector<double> beta1_by_level;
  std::vector<double> beta2_by_level;
  Eigen::VectorXd statistic;
  Eigen::VectorXd scale1;
  Eigen::VectorXd scale2;

  bool positive(std::size_t level_index) const {
    const double b1 = beta1_by_level[level_index];
    const double b2 = beta2_by_level[level_index];
    for (Eigen::Index j = 0; j < statistic.size(); ++j)
      if (statistic(j) > b1 * scale1(j) + b2 * scale2(j)) return true;
    return false;
  }
};

TrialScorer score_one_trial(int trial, const TrialGenerator& generator,
                            const PipelineConfig& cfg, const std::vector<double>& alphas) {
  return with_trial_context(trial, [&]() {
    auto pair = generator(trial);
    const DataSet& d1 = pair.first;
    const DataSet& d2 = pair.second;

    FittedModel model1 = fit(d1, cfg.input_spec, cfg.lambda, cfg.output_spec);
    FittedModel model2 = fit(d2, cfg.input_spec, cfg.lambda, cfg.output_spec);

    Eigen::MatrixXd grid(d1.covariates.rows(), d1.size() + d2.size());
    grid << d1.covariates, d2.covariates;

    TrialScorer scorer;
    scorer.statistic = cmmd_profile(model1, model2, grid);
    scorer.beta1_by_level.reserve(alphas.size());
    scorer.beta2_by_level.reserve(alphas.size());

    const bool analytical = cfg.source == ThresholdSource::AnalyticalOnline ||
                            cfg.source == ThresholdSource::AnalyticalFixed;
    if (analytical) {
      scorer.scale1 = posterior_scale_profile(model1, grid);
      scorer.scale2 = posterior_scale_profile(model2, grid);
      const GramMatrix gram1 = gram(cfg.input_spec, d1.covariates);
      const GramMatrix gram2 = gram(cfg.input_spec, d2.covariates);
      for (double alpha : alphas) {
        ThresholdParams p1 = cfg.params;
        ThresholdParams p2 = cfg.params;
        p1.delta = alpha * cfg.split;
        p2.delta = alpha * (1.0 - cfg.split);
        if (cfg.source == ThresholdSource::AnalyticalOnline) {
          scorer.beta1_by_level.push_back(beta_online(p1, gram1, cfg.lambda));
          scorer.beta2_by_level.push_back(beta_online(p2, gram2, cfg.lambda));
        } else {
          scorer.beta1_by_level.push_back(beta_fixed(p1, gram1, cfg.lambda));
          scorer.beta2_by_level.push_back(beta_fixed(p2, gram2, cfg.lambda));
        }
      }
      return scorer;
    }

    BootstrapConfig bc;
    bc.replicates = cfg.replicates;
    bc.alpha = alphas.front();
    bc.split = cfg.split;
    bc.grid = grid;
    bc.threads = 1;  // trials already parallelize one level up
    if (cfg.source == ThresholdSource::BootstrapWildResidual)
      bc.studentizer = WildStudentizer::Residual;

    bc.role = QuantileRole::First;
    bc.seed = Rng::mix(cfg.seed, {kTrialStream, static_cast<std::uint64_t>(trial), 1});
    CalibrationResult res1 =
        cfg.source == ThresholdSource::BootstrapNaive
            ? naive_bootstrap(d1, cfg.input_spec, cfg.output_spec, cfg.lambda, bc)
            : wild_bootstrap(d1, cfg.input_spec, cfg.output_spec, cfg.lambda, bc);

    bc.role = QuantileRole::Second;
    bc.seed = Rng::mix(cfg.seed, {kTrialStream, static_cast<std::uint64_t>(trial), 2});
    CalibrationResult res2 =
        cfg.source == ThresholdSource::BootstrapNaive
            ? naive_bootstrap(d2, cfg.input_spec, cfg.output_spec, cfg.lambda, bc)
            : wild_bootstrap(d2, cfg.input_spec, cfg.output_spec, cfg.lambda, bc);

    if (cfg.source == ThresholdSource::BootstrapWildResidual) {
      scorer.scale1 = residual_scale_profile(model1, grid);
      scorer.scale2 = residual_scale_profile(model2, grid);
    } else {
      scorer.scale1 = posterior_scale_profile(model1, grid);
      scorer.scale2 = posterior_scale_profile(model2, grid);
    }

    for (double alpha : alphas) {
      auto levels = split_quantiles(alpha, cfg.split);
      scorer.beta1_by_level.push_back(
          empirical_quantile(res1.replicate_stats, levels.first));
      scorer.beta2_by_level.push_back(
          empirical_quantile(res2.replicate_stats, levels.second));
    }
    return scorer;
  });
}

}  // namespace

TestReport run_test(const FittedModel& model1, const FittedModel& model2,
                    const ThresholdModel& thr1, const ThresholdModel& thr2,
                    const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  if (thr1.beta < 0.0 || thr2.beta < 0.0)
    throw ParameterError("threshold multipliers must be nonnegative");
  Eigen::VectorXd statistic = cmmd_profile(model1, model2, xs);
  Eigen::VectorXd threshold =
      thr1.beta * scale_profile(thr1, xs) + thr2.beta * scale_profile(thr2, xs);

  TestReport report;
  report.records.resize(static_cast<std::size_t>(xs.cols()));
  for (Eigen::Index j = 0; j < xs.cols(); ++j) {
    TestRecord& rec = report.records[static_cast<std::size_t>(j)];
    rec.x = xs.col(j);
    rec.statistic = statistic(j);
    rec.threshold = threshold(j);
    rec.reject = rec.statistic > rec.threshold;
    if (rec.reject) report.rejection_region.push_back(static_cast<int>(j));
  }
  return report;
}

std::vector<ErrorEstimate> positive_rate_sweep(const TrialGenerator& generator,
                                               const PipelineConfig& cfg, int trials,
                                               const std::vector<double>& alphas,
                                               TestRegime regime) {
  if (trials < 1) throw ParameterError("positive-rate estimation needs at least one trial");
  if (alphas.empty()) throw ParameterError("no levels supplied");
  for (double alpha : alphas)
    if (!(alpha > 0.0) || !(alpha < 1.0))
      throw ParameterError("level alpha must lie in (0,1)");

  // positives(t, a): slot-indexed so threading cannot affect the tallies
  std::vector<std::uint8_t> positives(static_cast<std::size_t>(trials) * alphas.size(), 0);
  parallel_for(trials, cfg.threads, [&](Eigen::Index t) {
    TrialScorer scorer = score_one_trial(static_cast<int>(t), generator, cfg, alphas);
    for (std::size_t a = 0; a < alphas.size(); ++a)
      positives[static_cast<std::size_t>(t) * alphas.size() + a] =
          scorer.positive(a) ? 1 : 0;
  });

  std::vector<ErrorEstimate> estimates(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    int count = 0;
    for (int t = 0; t < trials; ++t)
      count += positives[static_cast<std::size_t>(t) * alphas.size() + a];
    estimates[a].positive_rate = static_cast<double>(count) / static_cast<double>(trials);
    estimates[a].trials = trials;
    estimates[a].regime = regime;
  }
  return estimates;
}

ErrorEstimate positive_rate(const TrialGenerator& generator, const PipelineConfig& cfg,
                            int trials, TestRegime regime) {
  return positive_rate_sweep(generator, cfg, trials, {cfg.alpha}, regime).front();
}

std::pair<std::vector<int>, std::vector<int>> error_regions(
    const std::function<bool(int)>& truth, const TestReport& report) {
  std::vector<int> type_one;
  std::vector<int> type_two;
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const int idx = static_cast<int>(i);
    const bool null_holds = truth(idx);
    const bool rejected = report.records[i].reject;
    if (rejected && null_holds) type_one.push_back(idx);
    if (!rejected && !null_holds) type_two.push_back(idx);
  }
  return {type_one, type_two};
}

}  // namespace cmmd
