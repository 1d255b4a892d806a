// End-to-end tests of the installed command line tool: each case shells out
// to the real binary (path injected by the build as CMMD_CLI_PATH) inside a
// throwaway directory and inspects exit codes, diagnostics, and output bytes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int code = -1;
  std::string err;
};

// Scratch directory per test case, removed on scope exit.
struct Scratch {
  fs::path dir;

  Scratch() {
    dir = fs::temp_directory_path() /
          ("cmmd_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }

  static int& counter() {
    static int value = 0;
    return value;
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void write(const std::string& name, const std::string& body) const {
    std::ofstream stream(path(name));
    stream << body;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream stream(path(name));
    REQUIRE(stream.good());
    std::ostringstream out;
    out << stream.rdbuf();
    return out.str();
  }

  CommandResult run(const std::string& args, const std::string& env_prefix = "") const {
    const std::string err_file = path("stderr.txt");
    const std::string command = env_prefix + std::string(CMMD_CLI_PATH) + " " + args + " > " +
                                path("stdout.txt") + " 2> " + err_file;
    const int raw = std::system(command.c_str());
    CommandResult result;
    if (raw != -1 && WIFEXITED(raw)) result.code = WEXITSTATUS(raw);
    std::ifstream stream(err_file);
    std::ostringstream err;
    err << stream.rdbuf();
    result.err = err.str();
    return result;
  }
};

const char* kCalibrateConfig = R"({
  "schema_version": 1,
  "input_kernel": {"family": "gaussian", "bandwidth": 0.25},
  "output_kernel": {"family": "linear", "offset": 0},
  "lambda": 0.1,
  "alpha": 0.05,
  "replicates": 25
})";

const char* kSweepConfig = R"({
  "schema_version": 1,
  "regime": "shift",
  "parameters": [1.5],
  "alphas": [0.05, 0.1],
  "sample_sizes": [25],
  "trials": 3,
  "method": "wild",
  "replicates": 25,
  "lambda": 0.1,
  "input_kernel": {"family": "gaussian", "bandwidth": 0.25},
  "output_kernel": {"family": "linear", "offset": 0},
  "domain": {"half_width": 1.0, "dim": 1},
  "noise": {"family": "gaussian", "std_dev": 0.05}
})";

// Simulates a short trajectory into <scratch>/data/transitions.csv and
// returns its path; most cases reuse this as their input data.
std::string simulated_data(const Scratch& scratch) {
  scratch.write("sim.json", R"({"schema_version": 1, "dimension": 2, "noise_std": 0.05, "steps": 40})");
  const CommandResult result =
      scratch.run("simulate --config " + scratch.path("sim.json") + " --seed 7 --out " +
                  scratch.path("data"));
  REQUIRE(result.code == 0);
  return scratch.path("data/transitions.csv");
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("simulate writes a transition-pair data file") {
    Scratch scratch;
    const std::string data = simulated_data(scratch);
    const std::string body = scratch.slurp("data/transitions.csv");
    CHECK(body.rfind("x_1,x_2,z_1,z_2\n", 0) == 0);
    CHECK(scratch.slurp("data/simulate_meta.json").find("\"schema_version\": 1") !=
          std::string::npos);
  }

  TEST_CASE("test on identical input files accepts everywhere and exits 0") {
    Scratch scratch;
    const std::string data = simulated_data(scratch);
    scratch.write("cfg.json", kCalibrateConfig);
    const CommandResult result =
        scratch.run("test " + data + " " + data + " --config " + scratch.path("cfg.json") +
                    " --seed 5 --out " + scratch.path("out"));
    CHECK(result.code == 0);

    const nlohmann::json region = nlohmann::json::parse(scratch.slurp("out/region.json"));
    CHECK(region.at("schema_version") == 1);
    CHECK(region.at("any_rejection") == false);
    CHECK(region.at("rejected").empty());
    CHECK(region.at("tested") == 80);

    // every report row carries statistic exactly 0 and reject = 0
    std::istringstream report(scratch.slurp("out/report.csv"));
    std::string line;
    std::getline(report, line);
    CHECK(line == "x_1,x_2,statistic,threshold,reject");
    int rows = 0;
    while (std::getline(report, line)) {
      ++rows;
      CHECK(line.find(",0,") != std::string::npos);  // statistic column
      CHECK(line.back() == '0');                     // reject column
    }
    CHECK(rows == 80);
  }

  TEST_CASE("calibrate reports the factorization cost of each flavor") {
    Scratch scratch;
    const std::string data = simulated_data(scratch);
    scratch.write("cfg.json", kCalibrateConfig);

    CHECK(scratch.run("calibrate " + data + " --method wild --config " + scratch.path("cfg.json") +
                      " --seed 3 --out " + scratch.path("wild"))
              .code == 0);
    const nlohmann::json wild = nlohmann::json::parse(scratch.slurp("wild/calibration.json"));
    CHECK(wild.at("factorizations") == 1);
    CHECK(wild.at("replicate_stats").size() == 25);
    CHECK(wild.at("beta").get<double>() > 0.0);

    CHECK(scratch.run("calibrate " + data + " --method naive --config " +
                      scratch.path("cfg.json") + " --seed 3 --out " + scratch.path("naive"))
              .code == 0);
    const nlohmann::json naive = nlohmann::json::parse(scratch.slurp("naive/calibration.json"));
    CHECK(naive.at("factorizations") == 50);  // two resample fits per replicate
  }

  TEST_CASE("fixed seed reproduces byte-identical outputs, flag or environment") {
    Scratch scratch;
    const std::string data = simulated_data(scratch);
    scratch.write("cfg.json", kCalibrateConfig);
    scratch.write("sweep.json", kSweepConfig);

    const std::string calibrate_args =
        "calibrate " + data + " --config " + scratch.path("cfg.json") + " --out ";
    CHECK(scratch.run(calibrate_args + scratch.path("a") + " --seed 3").code == 0);
    CHECK(scratch.run(calibrate_args + scratch.path("b") + " --seed 3").code == 0);
    CHECK(scratch.run(calibrate_args + scratch.path("c"), "CMMD_SEED=3 ").code == 0);
    const std::string reference = scratch.slurp("a/calibration.json");
    CHECK(scratch.slurp("b/calibration.json") == reference);
    CHECK(scratch.slurp("c/calibration.json") == reference);

    const std::string sweep_args = "sweep --config " + scratch.path("sweep.json") + " --seed 11";
    CHECK(scratch.run(sweep_args + " --threads 2 --out " + scratch.path("s1")).code == 0);
    CHECK(scratch.run(sweep_args + " --threads 1 --out " + scratch.path("s2")).code == 0);
    CHECK(scratch.slurp("s1/sweep.csv") == scratch.slurp("s2/sweep.csv"));
    CHECK(scratch.slurp("s1/sweep.csv").rfind(
              "regime,parameter,n,alpha,trials,positive_rate,error_rate\n", 0) == 0);
  }

  TEST_CASE("malformed data files exit 1 with the offending line in the message") {
    Scratch scratch;
    scratch.write("cfg.json", kCalibrateConfig);
    scratch.write("bad.csv", "x_1,z_1\n1.0,2.0\n1.0,oops\n");
    const CommandResult result =
        scratch.run("calibrate " + scratch.path("bad.csv") + " --config " +
                    scratch.path("cfg.json") + " --out " + scratch.path("out"));
    CHECK(result.code == 1);
    CHECK(result.err.find("bad.csv:3:") != std::string::npos);
    CHECK(result.err.find("oops") != std::string::npos);
  }

  TEST_CASE("config violations are enumerated together before any work") {
    Scratch scratch;
    const std::string data = simulated_data(scratch);
    scratch.write("bad.json", R"({
      "schema_version": 2,
      "input_kernel": {"family": "gauss"},
      "lambda": -1,
      "alpha": 3,
      "replicates": 0,
      "typo_key": 1
    })");
    const CommandResult result =
        scratch.run("calibrate " + data + " --config " + scratch.path("bad.json") + " --out " +
                    scratch.path("out"));
    CHECK(result.code == 1);
    for (const char* fragment :
         {"schema_version", "input_kernel.family", "output_kernel", "lambda", "alpha",
          "replicates", "typo_key"})
      CHECK(result.err.find(fragment) != std::string::npos);
    CHECK(!fs::exists(scratch.path("out/calibration.json")));
  }

  TEST_CASE("numerical failures exit 2") {
    Scratch scratch;
    nlohmann::json cfg = nlohmann::json::parse(kSweepConfig);
    cfg["domain"] = {{"half_width", 1e-9}, {"dim", 1}};
    cfg["mean_dim"] = 30;  // thirty anchors in a 1e-9 box: the Gram cannot factor
    scratch.write("sweep.json", cfg.dump());
    const CommandResult result = scratch.run("sweep --config " + scratch.path("sweep.json") +
                                             " --out " + scratch.path("out"));
    CHECK(result.code == 2);
    CHECK(result.err.find("numerical error:") != std::string::npos);
  }

  TEST_CASE("monitor writes the ratio time series with flagged warmup") {
    Scratch scratch;
    scratch.write("mon.json", R"({
      "schema_version": 1,
      "reference_trajectories": 2, "reference_length": 30,
      "window": 6, "total_steps": 8, "change_step": 4,
      "perturbation": 2.0, "dimension": 2, "noise_std": 0.05,
      "lambda": 0.05, "alpha": 0.05, "replicates": 10
    })");
    const CommandResult result = scratch.run("monitor --config " + scratch.path("mon.json") +
                                             " --seed 13 --out " + scratch.path("out"));
    CHECK(result.code == 0);
    const std::string body = scratch.slurp("out/monitor.csv");
    CHECK(body.rfind("step,max_ratio,mean_ratio,mean_reference_scale,warmup\n", 0) == 0);
    CHECK(body.find("\n1,") != std::string::npos);

    const nlohmann::json meta = nlohmann::json::parse(scratch.slurp("out/monitor_meta.json"));
    CHECK(meta.at("metadata").at("perturbation_norm") == "schatten-1");
  }
}
