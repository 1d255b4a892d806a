#include "config.hpp"

#include <fstream>
#include <initializer_list>
#include <optional>
#include <utility>

#include "cmmd/errors.hpp"

namespace cmmdcli {

namespace {

// Typed field access over one JSON object. Every miss or type clash lands in
// the shared error list under "scope.key", so a config with five problems
// reports five lines before the tool gives up.
class Fields {
 public:
  Fields(const nlohmann::json& node, std::string scope, ConfigErrors& errors)
      : node_(node), scope_(std::move(scope)), errors_(errors) {}

  double number(const char* key, std::optional<double> fallback = {}) {
    const nlohmann::json* value = find(key, fallback.has_value(), "number");
    if (!value) return fallback.value_or(0.0);
    if (!value->is_number()) {
      complain(key, "expected a number");
      return fallback.value_or(0.0);
    }
    return value->get<double>();
  }

  int integer(const char* key, std::optional<int> fallback = {}) {
    const nlohmann::json* value = find(key, fallback.has_value(), "integer");
    if (!value) return fallback.value_or(0);
    if (!value->is_number_integer()) {
      complain(key, "expected an integer");
      return fallback.value_or(0);
    }
    return value->get<int>();
  }

  std::string text(const char* key, std::optional<std::string> fallback = {}) {
    const nlohmann::json* value = find(key, fallback.has_value(), "string");
    if (!value) return fallback.value_or("");
    if (!value->is_string()) {
      complain(key, "expected a string");
      return fallback.value_or("");
    }
    return value->get<std::string>();
  }

  std::vector<double> number_list(const char* key, std::vector<double> fallback,
                                  bool required) {
    const nlohmann::json* value = find(key, !required, "array of numbers");
    if (!value) return fallback;
    if (!value->is_array() || value->empty()) {
      complain(key, "expected a nonempty array of numbers");
      return fallback;
    }
    std::vector<double> out;
    for (const auto& item : *value) {
      if (!item.is_number()) {
        complain(key, "expected a nonempty array of numbers");
        return fallback;
      }
      out.push_back(item.get<double>());
    }
    return out;
  }

  std::vector<int> integer_list(const char* key, std::vector<int> fallback, bool required) {
    const nlohmann::json* value = find(key, !required, "array of integers");
    if (!value) return fallback;
    if (!value->is_array() || value->empty()) {
      complain(key, "expected a nonempty array of integers");
      return fallback;
    }
    std::vector<int> out;
    for (const auto& item : *value) {
      if (!item.is_number_integer()) {
        complain(key, "expected a nonempty array of integers");
        return fallback;
      }
      out.push_back(item.get<int>());
    }
    return out;
  }

  // nullptr when absent; complains when absent and required.
  const nlohmann::json* object(const char* key, bool required) {
    const nlohmann::json* value = find(key, !required, "object");
    if (!value) return nullptr;
    if (!value->is_object()) {
      complain(key, "expected an object");
      return nullptr;
    }
    return value;
  }

  // Call last: flags keys that no reader asked about, which are usually typos.
  void reject_unknown_keys(std::initializer_list<const char*> known) {
    for (const auto& item : node_.items()) {
      bool matched = false;
      for (const char* key : known)
        if (item.key() == key) {
          matched = true;
          break;
        }
      if (!matched) complain(item.key().c_str(), "unknown key");
    }
  }

  void complain(const char* key, const std::string& what) {
    errors_.add(scope_.empty() ? std::string(key) + ": " + what
                               : scope_ + "." + key + ": " + what);
  }

 private:
  const nlohmann::json* find(const char* key, bool optional, const char* kind) {
    const auto it = node_.find(key);
    if (it != node_.end()) return &*it;
    if (!optional) complain(key, std::string("missing required ") + kind);
    return nullptr;
  }

  const nlohmann::json& node_;
  std::string scope_;
  ConfigErrors& errors_;
};

void check_schema_version(Fields& fields) {
  const int version = fields.integer("schema_version", -1);
  if (version == -1) return;  // the missing-key complaint already fired
  if (version != 1) fields.complain("schema_version", "unsupported (this tool reads version 1)");
}

cmmd::KernelSpec parse_kernel(Fields& parent, const char* key, bool required,
                              const std::string& scope, ConfigErrors& errors,
                              cmmd::KernelSpec fallback = cmmd::KernelSpec::gaussian(1.0)) {
  const nlohmann::json* node = parent.object(key, required);
  if (!node) return fallback;

  Fields fields(*node, scope, errors);
  const std::string family = fields.text("family");
  cmmd::KernelSpec spec = fallback;
  if (family == "gaussian") {
    spec = cmmd::KernelSpec::gaussian(fields.number("bandwidth"));
    fields.reject_unknown_keys({"family", "bandwidth"});
  } else if (family == "linear") {
    spec = cmmd::KernelSpec::linear(fields.number("offset", 1.0));
    fields.reject_unknown_keys({"family", "offset"});
  } else if (family == "polynomial") {
    spec = cmmd::KernelSpec::polynomial(fields.integer("degree"), fields.number("offset", 1.0));
    fields.reject_unknown_keys({"family", "degree", "offset"});
  } else if (!family.empty()) {
    fields.complain("family", "expected gaussian, linear, or polynomial");
    return fallback;
  } else {
    return fallback;
  }

  try {
    spec.validate();
  } catch (const cmmd::ParameterError& e) {
    errors.add(scope + ": " + e.what());
  }
  return spec;
}

cmmd::NoiseModel parse_noise(Fields& parent, const char* key, ConfigErrors& errors) {
  cmmd::NoiseModel noise = cmmd::NoiseModel::gaussian(0.1);
  const nlohmann::json* node = parent.object(key, false);
  if (!node) return noise;

  Fields fields(*node, key, errors);
  const std::string family = fields.text("family", "gaussian");
  if (family == "gaussian") {
    noise = cmmd::NoiseModel::gaussian(fields.number("std_dev"));
    fields.reject_unknown_keys({"family", "std_dev"});
  } else if (family == "symmetric_mixture") {
    noise = cmmd::NoiseModel::symmetric_mixture(fields.number("mixture_mean"),
                                                fields.number("std_dev"));
    fields.reject_unknown_keys({"family", "std_dev", "mixture_mean"});
  } else {
    fields.complain("family", "expected gaussian or symmetric_mixture");
  }
  if (!(noise.std_dev >= 0.0)) fields.complain("std_dev", "must be >= 0");
  return noise;
}

// S/rho/trace terms for the analytical multipliers; delta is filled per side
// from alpha and the split at run time, so it is not a config field.
cmmd::ThresholdParams parse_analytical(Fields& parent, ConfigErrors& errors) {
  cmmd::ThresholdParams params;
  const nlohmann::json* node = parent.object("analytical", false);
  if (!node) return params;

  Fields fields(*node, "analytical", errors);
  params.S = fields.number("S", params.S);
  params.rho = fields.number("rho", params.rho);
  params.trace_RV = fields.number("trace_RV", params.trace_RV);
  params.trace_RG = fields.number("trace_RG", params.trace_RG);
  params.hs_RG = fields.number("hs_RG", params.hs_RG);
  params.op_RG = fields.number("op_RG", params.op_RG);
  fields.reject_unknown_keys({"S", "rho", "trace_RV", "trace_RG", "hs_RG", "op_RG"});
  try {
    params.validate();
  } catch (const cmmd::ParameterError& e) {
    errors.add(std::string("analytical: ") + e.what());
  }
  return params;
}

cmmd::ThresholdSource parse_method(Fields& fields, const char* key,
                                   cmmd::ThresholdSource fallback) {
  const std::string name = fields.text(key, method_name(fallback));
  if (name == "wild") return cmmd::ThresholdSource::BootstrapWild;
  if (name == "naive") return cmmd::ThresholdSource::BootstrapNaive;
  if (name == "wild_residual") return cmmd::ThresholdSource::BootstrapWildResidual;
  if (name == "analytical_online") return cmmd::ThresholdSource::AnalyticalOnline;
  if (name == "analytical_fixed") return cmmd::ThresholdSource::AnalyticalFixed;
  fields.complain(key,
                  "expected wild, naive, wild_residual, analytical_online, or analytical_fixed");
  return fallback;
}

void check_shared_test_fields(Fields& fields, double lambda, double alpha, double split,
                              int replicates) {
  if (!(lambda > 0.0)) fields.complain("lambda", "must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) fields.complain("alpha", "must lie in (0,1)");
  if (!(split > 0.0 && split < 1.0)) fields.complain("split", "must lie in (0,1)");
  if (replicates < 1) fields.complain("replicates", "must be >= 1");
}

}  // namespace

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream stream(path);
  if (!stream) throw cmmd::InputError(path + ": cannot open config file");
  try {
    return nlohmann::json::parse(stream);
  } catch (const nlohmann::json::parse_error& e) {
    throw cmmd::InputError(path + ": " + e.what());
  }
}

TestConfig parse_test_config(const nlohmann::json& root, ConfigErrors& errors) {
  TestConfig cfg;
  Fields fields(root, "", errors);
  check_schema_version(fields);
  cfg.input_kernel = parse_kernel(fields, "input_kernel", true, "input_kernel", errors);
  cfg.output_kernel = parse_kernel(fields, "output_kernel", true, "output_kernel", errors);
  cfg.lambda = fields.number("lambda", cfg.lambda);
  cfg.alpha = fields.number("alpha", cfg.alpha);
  cfg.split = fields.number("split", cfg.split);
  cfg.method = parse_method(fields, "method", cfg.method);
  cfg.replicates = fields.integer("replicates", cfg.replicates);
  cfg.analytical = parse_analytical(fields, errors);
  check_shared_test_fields(fields, cfg.lambda, cfg.alpha, cfg.split, cfg.replicates);
  fields.reject_unknown_keys({"schema_version", "input_kernel", "output_kernel", "lambda",
                              "alpha", "split", "method", "replicates", "analytical"});
  return cfg;
}

CalibrateConfig parse_calibrate_config(const nlohmann::json& root, ConfigErrors& errors) {
  CalibrateConfig cfg;
  Fields fields(root, "", errors);
  check_schema_version(fields);
  cfg.input_kernel = parse_kernel(fields, "input_kernel", true, "input_kernel", errors);
  cfg.output_kernel = parse_kernel(fields, "output_kernel", true, "output_kernel", errors);
  cfg.lambda = fields.number("lambda", cfg.lambda);
  cfg.alpha = fields.number("alpha", cfg.alpha);
  cfg.split = fields.number("split", cfg.split);
  cfg.replicates = fields.integer("replicates", cfg.replicates);

  const std::string role = fields.text("role", "first");
  if (role == "first")
    cfg.role = cmmd::QuantileRole::First;
  else if (role == "second")
    cfg.role = cmmd::QuantileRole::Second;
  else
    fields.complain("role", "expected first or second");

  const std::string studentizer = fields.text("studentizer", "posterior");
  if (studentizer == "posterior")
    cfg.studentizer = cmmd::WildStudentizer::Posterior;
  else if (studentizer == "residual")
    cfg.studentizer = cmmd::WildStudentizer::Residual;
  else
    fields.complain("studentizer", "expected posterior or residual");

  check_shared_test_fields(fields, cfg.lambda, cfg.alpha, cfg.split, cfg.replicates);
  fields.reject_unknown_keys({"schema_version", "input_kernel", "output_kernel", "lambda",
                              "alpha", "split", "replicates", "role", "studentizer"});
  return cfg;
}

SweepConfig parse_sweep_config(const nlohmann::json& root, ConfigErrors& errors) {
  SweepConfig cfg;
  Fields fields(root, "", errors);
  check_schema_version(fields);

  const std::string regime = fields.text("regime");
  if (regime == "null")
    cfg.regime = cmmd::Regime::Null;
  else if (regime == "shift")
    cfg.regime = cmmd::Regime::Shift;
  else if (regime == "rare")
    cfg.regime = cmmd::Regime::Rare;
  else if (regime == "noise_mixture")
    cfg.regime = cmmd::Regime::NoiseMixture;
  else if (regime == "independent")
    cfg.regime = cmmd::Regime::Independent;
  else if (!regime.empty())
    fields.complain("regime", "expected null, shift, rare, noise_mixture, or independent");

  // Null and independent take no parameter; a single placeholder cell keeps
  // the output grid rectangular.
  const bool parameterized =
      cfg.regime == cmmd::Regime::Shift || cfg.regime == cmmd::Regime::Rare ||
      cfg.regime == cmmd::Regime::NoiseMixture;
  cfg.parameters = fields.number_list("parameters", {0.0}, parameterized);
  cfg.alphas = fields.number_list("alphas", {}, true);
  cfg.sample_sizes = fields.integer_list("sample_sizes", {}, true);
  for (int n : cfg.sample_sizes)
    if (n < 1) {
      fields.complain("sample_sizes", "entries must be >= 1");
      break;
    }
  cfg.trials = fields.integer("trials", cfg.trials);
  if (cfg.trials < 1) fields.complain("trials", "must be >= 1");

  cfg.method = parse_method(fields, "method", cfg.method);
  cfg.replicates = fields.integer("replicates", cfg.replicates);
  cfg.lambda = fields.number("lambda", cfg.lambda);
  cfg.split = fields.number("split", cfg.split);
  cfg.input_kernel = parse_kernel(fields, "input_kernel", true, "input_kernel", errors);
  cfg.output_kernel = parse_kernel(fields, "output_kernel", true, "output_kernel", errors);
  cfg.analytical = parse_analytical(fields, errors);
  check_shared_test_fields(fields, cfg.lambda, cfg.alphas.empty() ? 0.05 : cfg.alphas.front(),
                           cfg.split, cfg.replicates);
  for (double alpha : cfg.alphas)
    if (!(alpha > 0.0 && alpha < 1.0)) {
      fields.complain("alphas", "entries must lie in (0,1)");
      break;
    }

  // Mean functions live in their own kernel (the sweep's input kernel by
  // default, matching how the synthetic studies are set up).
  cfg.settings.mean_spec = parse_kernel(fields, "mean_kernel", false, "mean_kernel", errors,
                                        cfg.input_kernel);
  cfg.settings.mean_dim = fields.integer("mean_dim", cfg.settings.mean_dim);
  cfg.settings.mean_norm = fields.number("mean_norm", cfg.settings.mean_norm);
  if (cfg.settings.mean_dim < 1) fields.complain("mean_dim", "must be >= 1");
  if (!(cfg.settings.mean_norm >= 0.0)) fields.complain("mean_norm", "must be >= 0");
  cfg.settings.noise = parse_noise(fields, "noise", errors);

  const nlohmann::json* domain = fields.object("domain", true);
  if (domain) {
    Fields domain_fields(*domain, "domain", errors);
    const double half_width = domain_fields.number("half_width");
    const int dim = domain_fields.integer("dim");
    domain_fields.reject_unknown_keys({"half_width", "dim"});
    if (!(half_width > 0.0)) domain_fields.complain("half_width", "must be > 0");
    if (dim < 1) domain_fields.complain("dim", "must be >= 1");
    if (half_width > 0.0 && dim >= 1) cfg.settings.domain = cmmd::Box::centered(half_width, dim);
  }

  fields.reject_unknown_keys({"schema_version", "regime", "parameters", "alphas",
                              "sample_sizes", "trials", "method", "replicates", "lambda",
                              "split", "input_kernel", "output_kernel", "mean_kernel",
                              "mean_dim", "mean_norm", "noise", "domain", "analytical"});
  return cfg;
}

cmmd::MonitorConfig parse_monitor_config(const nlohmann::json& root, ConfigErrors& errors) {
  cmmd::MonitorConfig cfg;
  Fields fields(root, "", errors);
  check_schema_version(fields);
  cfg.reference_trajectories = fields.integer("reference_trajectories", cfg.reference_trajectories);
  cfg.reference_length = fields.integer("reference_length", cfg.reference_length);
  cfg.window = fields.integer("window", cfg.window);
  cfg.total_steps = fields.integer("total_steps", cfg.total_steps);
  cfg.change_step = fields.integer("change_step", cfg.change_step);
  cfg.perturbation = fields.number("perturbation", cfg.perturbation);
  cfg.dimension = fields.integer("dimension", cfg.dimension);
  cfg.noise_std = fields.number("noise_std", cfg.noise_std);
  cfg.lambda = fields.number("lambda", cfg.lambda);
  cfg.alpha = fields.number("alpha", cfg.alpha);
  cfg.replicates = fields.integer("replicates", cfg.replicates);
  cfg.threshold_scale = fields.number("threshold_scale", cfg.threshold_scale);
  fields.reject_unknown_keys({"schema_version", "reference_trajectories", "reference_length",
                              "window", "total_steps", "change_step", "perturbation",
                              "dimension", "noise_std", "lambda", "alpha", "replicates",
                              "threshold_scale"});
  try {
    cfg.validate();
  } catch (const cmmd::ParameterError& e) {
    errors.add(e.what());
  }
  return cfg;
}

SimulateConfig parse_simulate_config(const nlohmann::json& root, ConfigErrors& errors) {
  SimulateConfig cfg;
  Fields fields(root, "", errors);
  check_schema_version(fields);
  cfg.dimension = fields.integer("dimension", cfg.dimension);
  cfg.noise_std = fields.number("noise_std", cfg.noise_std);
  cfg.steps = fields.integer("steps", cfg.steps);
  fields.reject_unknown_keys({"schema_version", "dimension", "noise_std", "steps"});
  if (cfg.dimension < 1) fields.complain("dimension", "must be >= 1");
  if (!(cfg.noise_std >= 0.0)) fields.complain("noise_std", "must be >= 0");
  if (cfg.steps < 1) fields.complain("steps", "must be >= 1");
  return cfg;
}

const char* method_name(cmmd::ThresholdSource source) {
  switch (source) {
    case cmmd::ThresholdSource::AnalyticalOnline:
      return "analytical_online";
    case cmmd::ThresholdSource::AnalyticalFixed:
      return "analytical_fixed";
    case cmmd::ThresholdSource::BootstrapNaive:
      return "naive";
    case cmmd::ThresholdSource::BootstrapWild:
      return "wild";
    case cmmd::ThresholdSource::BootstrapWildResidual:
      return "wild_residual";
  }
  return "unknown";
}

const char* regime_name(cmmd::Regime regime) {
  switch (regime) {
    case cmmd::Regime::Null:
      return "null";
    case cmmd::Regime::Shift:
      return "shift";
    case cmmd::Regime::Rare:
      return "rare";
    case cmmd::Regime::NoiseMixture:
      return "noise_mixture";
    case cmmd::Regime::Independent:
      return "independent";
  }
  return "unknown";
}

}  // namespace cmmdcli
