#ifndef CMMD_TOOLS_CONFIG_HPP
#define CMMD_TOOLS_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmmd/calibration.hpp"
#include "cmmd/dynamics.hpp"
#include "cmmd/experiments.hpp"
#include "cmmd/kernels.hpp"
#include "cmmd/thresholds.hpp"

namespace cmmdcli {

// Global flags after env-variable resolution.
struct RunOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";
};

// Collects every schema violation in a config file so one bad run reports
// them all instead of one per invocation.
struct ConfigErrors {
  std::vector<std::string> messages;

  void add(const std::string& message) { messages.push_back(message); }
  bool ok() const { return messages.empty(); }
};

struct TestConfig {
  cmmd::KernelSpec input_kernel;
  cmmd::KernelSpec output_kernel;
  double lambda = 0.1;
  double alpha = 0.05;
  double split = 0.5;
  cmmd::ThresholdSource method = cmmd::ThresholdSource::BootstrapWild;
  int replicates = 500;
  cmmd::ThresholdParams analytical;  // S, rho, trace_* for the analytical methods
};

struct CalibrateConfig {
  cmmd::KernelSpec input_kernel;
  cmmd::KernelSpec output_kernel;
  double lambda = 0.1;
  double alpha = 0.05;
  double split = 0.5;
  int replicates = 500;
  cmmd::QuantileRole role = cmmd::QuantileRole::First;
  cmmd::WildStudentizer studentizer = cmmd::WildStudentizer::Posterior;
};

struct SweepConfig {
  cmmd::Regime regime = cmmd::Regime::Null;
  std::vector<double> parameters;  // regime parameter grid (xi / theta / mu)
  std::vector<double> alphas;
  std::vector<int> sample_sizes;
  int trials = 100;
  cmmd::ThresholdSource method = cmmd::ThresholdSource::BootstrapWild;
  int replicates = 500;
  double lambda = 0.1;
  double split = 0.5;
  cmmd::KernelSpec input_kernel;
  cmmd::KernelSpec output_kernel;
  cmmd::PairSettings settings;
  cmmd::ThresholdParams analytical;
};

struct SimulateConfig {
  int dimension = 2;
  double noise_std = 0.01;
  int steps = 100;
};

// Reads and parses the file; unreadable files and JSON syntax errors throw
// cmmd::InputError with the path (and the parser's line/column) in the message.
nlohmann::json load_config_file(const std::string& path);

TestConfig parse_test_config(const nlohmann::json& root, ConfigErrors& errors);
CalibrateConfig parse_calibrate_config(const nlohmann::json& root, ConfigErrors& errors);
SweepConfig parse_sweep_config(const nlohmann::json& root, ConfigErrors& errors);
cmmd::MonitorConfig parse_monitor_config(const nlohmann::json& root, ConfigErrors& errors);
SimulateConfig parse_simulate_config(const nlohmann::json& root, ConfigErrors& errors);

const char* method_name(cmmd::ThresholdSource source);
const char* regime_name(cmmd::Regime regime);

}  // namespace cmmdcli

#endif
