// Command line front end: five subcommands over the library's pipeline
// (test, calibrate, sweep, monitor, simulate). All experiment definition
// lives in a JSON config file; the command line carries run identity (seed,
// threads, output directory) and the input data paths.
//
// Exit codes: 0 success, 1 input or configuration error, 2 numerical
// failure, 3 calibration failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmmd/calibration.hpp"
#include "cmmd/dynamics.hpp"
#include "cmmd/errors.hpp"
#include "cmmd/experiments.hpp"
#include "cmmd/io.hpp"
#include "cmmd/linalg.hpp"
#include "cmmd/regression.hpp"
#include "cmmd/rng.hpp"
#include "cmmd/testing.hpp"
#include "cmmd/thresholds.hpp"
#include "config.hpp"

namespace {

using cmmdcli::ConfigErrors;
using cmmdcli::RunOptions;

bool report_config_errors(const ConfigErrors& errors) {
  for (const std::string& message : errors.messages)
    std::cerr << "config error: " << message << "\n";
  return !errors.ok();
}

std::string output_path(const RunOptions& run, const char* name) {
  return (std::filesystem::path(run.out_dir) / name).string();
}

void write_json_file(const std::string& path, const nlohmann::json& body) {
  std::ofstream stream(path);
  if (!stream) throw cmmd::InputError(path + ": cannot open for writing");
  stream << body.dump(2) << "\n";
  if (!stream) throw cmmd::InputError(path + ": write failed");
}

bool is_analytical(cmmd::ThresholdSource source) {
  return source == cmmd::ThresholdSource::AnalyticalOnline ||
         source == cmmd::ThresholdSource::AnalyticalFixed;
}

// One side's calibrated multiplier under the configured method. The grid is
// the full set of covariates the test will be evaluated on.
double side_beta(const cmmd::DataSet& data, const cmmdcli::TestConfig& cfg,
                 const Eigen::MatrixXd& grid, cmmd::QuantileRole role, std::uint64_t seed,
                 int threads) {
  if (is_analytical(cfg.method)) {
    cmmd::ThresholdParams params = cfg.analytical;
    params.delta = role == cmmd::QuantileRole::First ? cfg.alpha * cfg.split
                                                     : cfg.alpha * (1.0 - cfg.split);
    const cmmd::GramMatrix g = cmmd::gram(cfg.input_kernel, data.covariates);
    return cfg.method == cmmd::ThresholdSource::AnalyticalOnline
               ? cmmd::beta_online(params, g, cfg.lambda)
               : cmmd::beta_fixed(params, g, cfg.lambda);
  }

  cmmd::BootstrapConfig bc;
  bc.replicates = cfg.replicates;
  bc.alpha = cfg.alpha;
  bc.split = cfg.split;
  bc.grid = grid;
  bc.seed = seed;
  bc.role = role;
  bc.threads = threads;
  if (cfg.method == cmmd::ThresholdSource::BootstrapWildResidual)
    bc.studentizer = cmmd::WildStudentizer::Residual;
  const cmmd::CalibrationResult result =
      cfg.method == cmmd::ThresholdSource::BootstrapNaive
          ? cmmd::naive_bootstrap(data, cfg.input_kernel, cfg.output_kernel, cfg.lambda, bc)
          : cmmd::wild_bootstrap(data, cfg.input_kernel, cfg.output_kernel, cfg.lambda, bc);
  return result.beta;
}

int run_test_command(const nlohmann::json& root, const RunOptions& run,
                     const std::string& path1, const std::string& path2) {
  ConfigErrors errors;
  const cmmdcli::TestConfig cfg = cmmdcli::parse_test_config(root, errors);
  if (report_config_errors(errors)) return 1;

  const cmmd::DataSet d1 = cmmd::read_data_csv(path1);
  const cmmd::DataSet d2 = cmmd::read_data_csv(path2);
  if (d1.covariates.rows() != d2.covariates.rows())
    throw cmmd::InputError(path2 + ": covariate dimension differs from " + path1);

  const cmmd::FittedModel m1 = cmmd::fit(d1, cfg.input_kernel, cfg.lambda, cfg.output_kernel);
  const cmmd::FittedModel m2 = cmmd::fit(d2, cfg.input_kernel, cfg.lambda, cfg.output_kernel);

  Eigen::MatrixXd xs(d1.covariates.rows(), d1.size() + d2.size());
  xs << d1.covariates, d2.covariates;

  cmmd::ThresholdModel thr1{side_beta(d1, cfg, xs, cmmd::QuantileRole::First,
                                      cmmd::Rng::mix(run.seed, {1}), run.threads),
                            cfg.method, m1};
  cmmd::ThresholdModel thr2{side_beta(d2, cfg, xs, cmmd::QuantileRole::Second,
                                      cmmd::Rng::mix(run.seed, {2}), run.threads),
                            cfg.method, m2};

  const cmmd::TestReport report = cmmd::run_test(m1, m2, thr1, thr2, xs);
  cmmd::write_report_csv(output_path(run, "report.csv"), report);

  nlohmann::json region{
      {"schema_version", 1},
      {"tested", static_cast<int>(xs.cols())},
      {"rejected", report.rejection_region},
      {"any_rejection", report.any_rejection()},
      {"beta_first", thr1.beta},
      {"beta_second", thr2.beta},
      {"metadata",
       {{"seed", run.seed},
        {"threads", run.threads},
        {"method", cmmdcli::method_name(cfg.method)},
        {"alpha", cfg.alpha},
        {"split", cfg.split},
        {"lambda", cfg.lambda},
        {"data_first", path1},
        {"data_second", path2}}}};
  write_json_file(output_path(run, "region.json"), region);
  return 0;
}

int run_calibrate_command(const nlohmann::json& root, const RunOptions& run,
                          const std::string& data_path, const std::string& method) {
  ConfigErrors errors;
  const cmmdcli::CalibrateConfig cfg = cmmdcli::parse_calibrate_config(root, errors);
  if (report_config_errors(errors)) return 1;

  const cmmd::DataSet data = cmmd::read_data_csv(data_path);

  cmmd::BootstrapConfig bc;
  bc.replicates = cfg.replicates;
  bc.alpha = cfg.alpha;
  bc.split = cfg.split;
  bc.seed = run.seed;
  bc.role = cfg.role;
  bc.studentizer = cfg.studentizer;
  bc.threads = run.threads;

  const std::uint64_t factorizations_before = cmmd::cholesky_count();
  const cmmd::CalibrationResult result =
      method == "naive"
          ? cmmd::naive_bootstrap(data, cfg.input_kernel, cfg.output_kernel, cfg.lambda, bc)
          : cmmd::wild_bootstrap(data, cfg.input_kernel, cfg.output_kernel, cfg.lambda, bc);
  const std::uint64_t factorizations = cmmd::cholesky_count() - factorizations_before;

  nlohmann::json out{
      {"schema_version", 1},
      {"beta", result.beta},
      {"quantile_level", result.quantile_level},
      {"replicates", cfg.replicates},
      {"factorizations", factorizations},
      {"replicate_stats", result.replicate_stats},
      {"metadata",
       {{"seed", run.seed},
        {"threads", run.threads},
        {"method", method},
        {"role", cfg.role == cmmd::QuantileRole::First ? "first" : "second"},
        {"studentizer",
         cfg.studentizer == cmmd::WildStudentizer::Posterior ? "posterior" : "residual"},
        {"alpha", cfg.alpha},
        {"split", cfg.split},
        {"lambda", cfg.lambda},
        {"data", data_path}}}};
  write_json_file(output_path(run, "calibration.json"), out);
  return 0;
}

int run_sweep_command(const nlohmann::json& root, const RunOptions& run) {
  ConfigErrors errors;
  const cmmdcli::SweepConfig cfg = cmmdcli::parse_sweep_config(root, errors);
  if (report_config_errors(errors)) return 1;

  cmmd::PipelineConfig pipeline;
  pipeline.input_spec = cfg.input_kernel;
  pipeline.output_spec = cfg.output_kernel;
  pipeline.lambda = cfg.lambda;
  pipeline.source = cfg.method;
  pipeline.replicates = cfg.replicates;
  pipeline.split = cfg.split;
  pipeline.params = cfg.analytical;
  pipeline.threads = run.threads;

  const cmmd::TestRegime regime_kind = cfg.regime == cmmd::Regime::Null
                                           ? cmmd::TestRegime::NullRegime
                                           : cmmd::TestRegime::AlternativeRegime;

  std::string table = "regime,parameter,n,alpha,trials,positive_rate,error_rate\n";
  for (std::size_t pi = 0; pi < cfg.parameters.size(); ++pi) {
    const cmmd::RegimeSpec spec{cfg.regime, cfg.parameters[pi]};
    for (std::size_t ni = 0; ni < cfg.sample_sizes.size(); ++ni) {
      const int n = cfg.sample_sizes[ni];
      // Decoupled streams per grid cell: one for the data draws, one for the
      // bootstrap, so adding grid points never reshuffles existing cells.
      const std::uint64_t data_seed = cmmd::Rng::mix(run.seed, {1, pi, ni});
      pipeline.seed = cmmd::Rng::mix(run.seed, {2, pi, ni});
      pipeline.alpha = cfg.alphas.front();

      const cmmd::PairSettings settings = cfg.settings;
      const cmmd::TrialGenerator generator = [spec, n, settings, data_seed](int trial) {
        return cmmd::generate_pair(spec, n, settings,
                                   cmmd::Rng::mix(data_seed, {static_cast<std::uint64_t>(trial)}));
      };

      const std::vector<cmmd::ErrorEstimate> estimates =
          cmmd::positive_rate_sweep(generator, pipeline, cfg.trials, cfg.alphas, regime_kind);
      for (std::size_t ai = 0; ai < estimates.size(); ++ai) {
        const cmmd::ErrorEstimate& estimate = estimates[ai];
        const double error_rate = regime_kind == cmmd::TestRegime::NullRegime
                                      ? estimate.type_one_error()
                                      : estimate.type_two_error();
        table += cmmdcli::regime_name(cfg.regime);
        table += ',' + cmmd::format_double(cfg.parameters[pi]);
        table += ',' + std::to_string(n);
        table += ',' + cmmd::format_double(cfg.alphas[ai]);
        table += ',' + std::to_string(estimate.trials);
        table += ',' + cmmd::format_double(estimate.positive_rate);
        table += ',' + cmmd::format_double(error_rate);
        table += '\n';
      }
    }
  }

  const std::string table_path = output_path(run, "sweep.csv");
  std::ofstream stream(table_path);
  if (!stream) throw cmmd::InputError(table_path + ": cannot open for writing");
  stream << table;
  if (!stream) throw cmmd::InputError(table_path + ": write failed");
  stream.close();

  nlohmann::json meta{{"schema_version", 1},
                      {"grid",
                       {{"parameters", cfg.parameters},
                        {"alphas", cfg.alphas},
                        {"sample_sizes", cfg.sample_sizes}}},
                      {"metadata",
                       {{"seed", run.seed},
                        {"threads", run.threads},
                        {"regime", cmmdcli::regime_name(cfg.regime)},
                        {"method", cmmdcli::method_name(cfg.method)},
                        {"trials", cfg.trials},
                        {"replicates", cfg.replicates},
                        {"lambda", cfg.lambda}}}};
  write_json_file(output_path(run, "sweep_meta.json"), meta);
  return 0;
}

int run_monitor_command(const nlohmann::json& root, const RunOptions& run) {
  ConfigErrors errors;
  cmmd::MonitorConfig cfg = cmmdcli::parse_monitor_config(root, errors);
  if (report_config_errors(errors)) return 1;
  cfg.threads = run.threads;

  const std::vector<cmmd::MonitorRecord> records = cmmd::monitor(cfg, run.seed);
  cmmd::write_monitor_csv(output_path(run, "monitor.csv"), records);

  nlohmann::json meta{{"schema_version", 1},
                      {"metadata",
                       {{"seed", run.seed},
                        {"threads", run.threads},
                        {"dimension", cfg.dimension},
                        {"window", cfg.window},
                        {"total_steps", cfg.total_steps},
                        {"change_step", cfg.change_step},
                        {"perturbation", cfg.perturbation},
                        // the step-size normalization of the dynamics rotation
                        {"perturbation_norm", "schatten-1"},
                        {"lambda", cfg.lambda},
                        {"alpha", cfg.alpha},
                        {"replicates", cfg.replicates},
                        {"threshold_scale", cfg.threshold_scale}}}};
  write_json_file(output_path(run, "monitor_meta.json"), meta);
  return 0;
}

int run_simulate_command(const nlohmann::json& root, const RunOptions& run) {
  ConfigErrors errors;
  const cmmdcli::SimulateConfig cfg = cmmdcli::parse_simulate_config(root, errors);
  if (report_config_errors(errors)) return 1;

  const cmmd::LinearSystem sys = cmmd::random_orthonormal_system(
      cfg.dimension, cfg.noise_std, cmmd::Rng::mix(run.seed, {1}));
  const cmmd::DataSet path = cmmd::simulate_system(sys, cfg.steps, cmmd::Rng::mix(run.seed, {2}));
  cmmd::write_data_csv(output_path(run, "transitions.csv"), path);

  nlohmann::json meta{{"schema_version", 1},
                      {"metadata",
                       {{"seed", run.seed},
                        {"dimension", cfg.dimension},
                        {"noise_std", cfg.noise_std},
                        {"steps", cfg.steps}}}};
  write_json_file(output_path(run, "simulate_meta.json"), meta);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel-based conditional two-sample testing toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  RunOptions run;
  std::string config_path;
  app.add_option("--seed", run.seed, "RNG seed (env CMMD_SEED)")->envname("CMMD_SEED");
  app.add_option("--threads", run.threads, "worker threads (env CMMD_THREADS)")
      ->envname("CMMD_THREADS");
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", run.out_dir, "output directory (created if missing)");

  std::string data1_path;
  std::string data2_path;
  CLI::App* test_cmd =
      app.add_subcommand("test", "conditional two-sample test on two paired data files");
  test_cmd->add_option("data1", data1_path, "first data CSV")->required();
  test_cmd->add_option("data2", data2_path, "second data CSV")->required();

  std::string calibrate_data_path;
  std::string calibrate_method = "wild";
  CLI::App* calibrate_cmd =
      app.add_subcommand("calibrate", "bootstrap a threshold multiplier for one data set");
  calibrate_cmd->add_option("data", calibrate_data_path, "data CSV")->required();
  calibrate_cmd->add_option("--method", calibrate_method, "bootstrap flavor")
      ->check(CLI::IsMember({"wild", "naive"}));

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "error-rate table over a synthetic regime grid");
  CLI::App* monitor_cmd =
      app.add_subcommand("monitor", "sliding-window change monitor on a linear system");
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "sample transition pairs from an orthonormal system");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run.threads < 1) {
      std::cerr << "config error: --threads must be >= 1\n";
      return 1;
    }
    std::filesystem::create_directories(run.out_dir);
    const nlohmann::json root = cmmdcli::load_config_file(config_path);

    if (*test_cmd) return run_test_command(root, run, data1_path, data2_path);
    if (*calibrate_cmd)
      return run_calibrate_command(root, run, calibrate_data_path, calibrate_method);
    if (*sweep_cmd) return run_sweep_command(root, run);
    if (*monitor_cmd) return run_monitor_command(root, run);
    if (*simulate_cmd) return run_simulate_command(root, run);
    return 1;
  } catch (const cmmd::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const cmmd::CalibrationError& e) {
    std::cerr << "calibration error: " << e.what() << "\n";
    return 3;
  } catch (const cmmd::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const cmmd::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 1;
  } catch (const cmmd::MisuseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
