#ifndef CMMD_EXPERIMENTS_HPP
#define CMMD_EXPERIMENTS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "cmmd/kernels.hpp"
#include "cmmd/regression.hpp"
#include "cmmd/rng.hpp"

namespace cmmd {

// Axis-aligned covariate domain; sampling is uniform per coordinate.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Box centered(double half_width, int dim);
  int dim() const { return static_cast<int>(lo.size()); }
  void validate() const;  // throws ParameterError
};

// f = sum_j weights_j k(., anchors_j) with |f|_k = norm exactly.
struct RkhsFunctionSample {
  Eigen::MatrixXd anchors;  // d x m
  Eigen::VectorXd weights;  // m
  double norm = 1.0;
  KernelSpec spec;
};

// Uniform draw from the radius-r sphere of span{k(., x_j)} with anchors
// uniform on the box: isotropic coefficients in the Gram geometry, rescaled
// so the RKHS norm is exactly r. Duplicate anchors make the span degenerate;
// such anchor sets are resampled (bounded retries).
RkhsFunctionSample sample_rkhs_function(const KernelSpec& spec, const Box& domain, int m,
                                        double r, std::uint64_t seed);
RkhsFunctionSample sample_rkhs_function(const KernelSpec& spec, const Box& domain, int m,
                                        double r, Rng& rng);

Eigen::VectorXd evaluate(const RkhsFunctionSample& f,
                         const Eigen::Ref<const Eigen::MatrixXd>& xs);
double evaluate_at(const RkhsFunctionSample& f, const Eigen::Ref<const Eigen::VectorXd>& x);

// Mean-zero measurement noise: N(0, s^2), or the equal-weight mixture of
// N(-mu, s^2) and N(+mu, s^2).
struct NoiseModel {
  enum class Family { Gaussian, SymmetricMixture };
  Family family = Family::Gaussian;
  double std_dev = 0.1;       // s
  double mixture_mean = 0.0;  // mu

  static NoiseModel gaussian(double s);
  static NoiseModel symmetric_mixture(double mu, double s);
  double draw(Rng& rng) const;
};

// The synthetic-experiment regimes:
//   Null:          f2 = f1 (every rejection is a false positive)
//   Shift:         f2 = f1 + h with |h| = parameter (xi)
//   Rare:          f2 = f1 + k(., 0); covariates sampled from the mixture
//                  theta * Unif{k(x,0) >= 1e-2} + (1-theta) * Unif{< 1e-2}
//   NoiseMixture:  f2 = f1, second data set gets symmetric-mixture noise
//                  with mu = parameter
//   Independent:   f1, f2 drawn independently (both norm mean_norm)
enum class Regime { Null, Shift, Rare, NoiseMixture, Independent };

struct RegimeSpec {
  Regime kind = Regime::Null;
  double parameter = 0.0;  // xi / theta / mu, per regime
};

struct PairSettings {
  KernelSpec mean_spec;  // kernel hosting the mean functions
  Box domain;
  int mean_dim = 12;      // m
  double mean_norm = 1.0; // r
  NoiseModel noise;       // base noise, applied to both sets unless the
                          // regime overrides the second
};

// The regime-level randomness: mean functions and per-set noise laws.
struct MeanPair {
  RkhsFunctionSample f1;
  RkhsFunctionSample f2;
  NoiseModel noise1;
  NoiseModel noise2;
  Regime regime = Regime::Null;
  double parameter = 0.0;
};

MeanPair regime_functions(const RegimeSpec& regime, const PairSettings& settings,
                          std::uint64_t seed);

// n fresh covariate/measurement pairs per set for fixed mean functions, so
// Monte Carlo runs can share one mean-function draw across many data draws.
std::pair<DataSet, DataSet> synthesize_pair(const MeanPair& means, int n,
                                            const PairSettings& settings,
                                            std::uint64_t seed);

std::pair<DataSet, DataSet> generate_pair(const RegimeSpec& regime, int n,
                                          const PairSettings& settings,
                                          std::uint64_t seed);

}  // namespace cmmd

#endif
