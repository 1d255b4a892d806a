#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "cmmd/calibration.hpp"
#include "cmmd/kernels.hpp"
#include "cmmd/regression.hpp"
#include "cmmd/rng.hpp"
#include "cmmd/statistic.hpp"

namespace {

using cmmd::BootstrapConfig;
using cmmd::DataSet;
using cmmd::FittedModel;
using cmmd::KernelSpec;
using cmmd::Rng;

DataSet sample_data(int n, int dim, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, {static_cast<std::uint64_t>(n)});
  DataSet data;
  data.covariates = Eigen::MatrixXd::NullaryExpr(
      dim, n, [&rng](Eigen::Index, Eigen::Index) { return rng.uniform(-1.0, 1.0); });
  data.measurements = Eigen::MatrixXd::NullaryExpr(
      1, n, [&rng](Eigen::Index, Eigen::Index) { return rng.normal(); });
  return data;
}

const KernelSpec kInput = KernelSpec::gaussian(0.25);
const KernelSpec kOutput = KernelSpec::linear(1.0);

void bm_gram(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DataSet data = sample_data(n, 2, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmmd::gram(kInput, data.covariates));
  }
  state.SetComplexityN(n);
}
BENCHMARK(bm_gram)->RangeMultiplier(4)->Range(64, 1024)->Complexity();

void bm_fit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DataSet data = sample_data(n, 2, 12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmmd::fit(data, kInput, 0.1, kOutput));
  }
  state.SetComplexityN(n);
}
BENCHMARK(bm_fit)->RangeMultiplier(4)->Range(64, 1024)->Complexity();

void bm_posterior_scale_profile(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DataSet data = sample_data(n, 2, 13);
  const FittedModel model = cmmd::fit(data, kInput, 0.1, kOutput);
  const Eigen::MatrixXd grid = sample_data(200, 2, 14).covariates;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmmd::posterior_scale_profile(model, grid));
  }
  state.SetComplexityN(n);
}
BENCHMARK(bm_posterior_scale_profile)->RangeMultiplier(4)->Range(64, 1024)->Complexity();

void bm_cmmd_profile(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const FittedModel first = cmmd::fit(sample_data(n, 2, 15), kInput, 0.1, kOutput);
  const FittedModel second = cmmd::fit(sample_data(n, 2, 16), kInput, 0.1, kOutput);
  const Eigen::MatrixXd grid = sample_data(200, 2, 17).covariates;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmmd::cmmd_profile(first, second, grid));
  }
  state.SetComplexityN(n);
}
BENCHMARK(bm_cmmd_profile)->RangeMultiplier(4)->Range(64, 1024)->Complexity();

// The two bootstrap flavors differ in per-replicate cost: wild reuses the
// single base fit, naive refits both resamples every replicate.
void bm_calibrate_wild(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DataSet data = sample_data(n, 2, 18);
  BootstrapConfig config;
  config.replicates = 50;
  config.grid = sample_data(50, 2, 19).covariates;
  config.seed = 20;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmmd::wild_bootstrap(data, kInput, kOutput, 0.1, config));
  }
  state.SetComplexityN(n);
}
BENCHMARK(bm_calibrate_wild)->RangeMultiplier(2)->Range(64, 256)->Complexity();

void bm_calibrate_naive(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DataSet data = sample_data(n, 2, 21);
  BootstrapConfig config;
  config.replicates = 50;
  config.grid = sample_data(50, 2, 19).covariates;
  config.seed = 23;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmmd::naive_bootstrap(data, kInput, kOutput, 0.1, config));
  }
  state.SetComplexityN(n);
}
BENCHMARK(bm_calibrate_naive)->RangeMultiplier(2)->Range(64, 256)->Complexity();

}  // namespace

BENCHMARK_MAIN();
