#include "cmmd/experiments.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <utility>

#include "cmmd/errors.hpp"

namespace cmmd {
namespace {

constexpr std::uint64_t kFuncStream = 0x66756e63;  // "func"
constexpr std::uint64_t kMeanStream = 0x6d65616e;  // "mean"
constexpr std::uint64_t kDataStream = 0x64617461;  // "data"
constexpr std::uint64_t kPairStream = 0x70616972;  // "pair"

// Membership threshold for the rare-event region {x : k(x, 0) >= kRareCut}.
constexpr double kRareCut = 1e-2;
constexpr int kMaxRejectionDraws = 100000;

Eigen::VectorXd uniform_point(const Box& domain, Rng& rng) {
  Eigen::VectorXd x(domain.dim());
  for (int i = 0; i < domain.dim(); ++i) {
    x(i) = rng.uniform(domain.lo(i), domain.hi(i));
  }
  return x;
}

double origin_kernel(const KernelSpec& spec, const Eigen::VectorXd& x) {
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(x.size());
  return evaluate(spec, x, origin);
}

// Rejection sampler for theta * Unif(X_diff) + (1 - theta) * Unif(X_same),
// where X_diff = {x : k(x, 0) >= kRareCut}.
Eigen::VectorXd mixture_point(const Box& domain, const KernelSpec& spec, double theta,
                              Rng& rng) {
  const bool want_diff = rng.uniform01() < theta;
  for (int attempt = 0; attempt < kMaxRejectionDraws; ++attempt) {
    Eigen::VectorXd x = uniform_point(domain, rng);
    const bool in_diff = origin_kernel(spec, x) >= kRareCut;
    if (in_diff == want_diff) return x;
  }
  throw ParameterError(want_diff
                           ? "rare regime: region k(x, 0) >= 1e-2 has negligible mass on the domain"
                           : "rare regime: region k(x, 0) < 1e-2 has negligible mass on the domain");
}

void validate_settings(const PairSettings& settings) {
  settings.mean_spec.validate();
  settings.domain.validate();
  if (settings.mean_dim < 1) {
    throw ParameterError("mean_dim must be at least 1");
  }
  if (!(settings.mean_norm >= 0.0) || !std::isfinite(settings.mean_norm)) {
    throw ParameterError("mean_norm must be finite and nonnegative");
  }
  if (!(settings.noise.std_dev >= 0.0) || !std::isfinite(settings.noise.std_dev)) {
    throw ParameterError("noise std_dev must be finite and nonnegative");
  }
}

double regime_parameter(const RegimeSpec& regime) {
  const double p = regime.parameter;
  switch (regime.kind) {
    case Regime::Null:
    case Regime::Independent:
      return 0.0;
    case Regime::Shift:
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ParameterError("shift regime requires a finite nonnegative norm");
      }
      return p;
    case Regime::Rare:
      if (!(p >= 0.0) || !(p <= 1.0)) {
        throw ParameterError("rare regime requires a mixture weight in [0, 1]");
      }
      return p;
    case Regime::NoiseMixture:
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ParameterError("noise mixture regime requires a finite nonnegative location");
      }
      return p;
  }
  throw ParameterError("unknown regime");
}

double rkhs_inner(const RkhsFunctionSample& a, const RkhsFunctionSample& b) {
  if (a.weights.size() == 0 || b.weights.size() == 0) return 0.0;
  const Eigen::MatrixXd cross = cross_gram(a.spec, a.anchors, b.anchors);
  return a.weights.dot(cross * b.weights);
}

}  // namespace

Box Box::centered(double half_width, int dim) {
  Box box;
  box.lo = Eigen::VectorXd::Constant(dim, -half_width);
  box.hi = Eigen::VectorXd::Constant(dim, half_width);
  return box;
}

void Box::validate() const {
  if (lo.size() == 0 || lo.size() != hi.size()) {
    throw ParameterError("domain bounds must be nonempty and of equal dimension");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo(i)) || !std::isfinite(hi(i)) || !(lo(i) < hi(i))) {
      throw ParameterError("domain bounds must be finite with lo < hi per coordinate");
    }
  }
}

RkhsFunctionSample sample_rkhs_function(const KernelSpec& spec, const Box& domain, int m,
                                        double r, Rng& rng) {
  spec.validate();
  domain.validate();
  if (m < 1) throw ParameterError("anchor count must be at least 1");
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw ParameterError("function norm must be finite and nonnegative");
  }

  // Retries cover anchor sets whose Gram is numerically singular (clustered
  // anchors) and the measure-zero g = 0 draw.
  constexpr int kMaxAttempts = 50;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Eigen::MatrixXd anchors(domain.dim(), m);
    for (int j = 0; j < m; ++j) anchors.col(j) = uniform_point(domain, rng);
    Eigen::VectorXd g(m);
    for (int j = 0; j < m; ++j) g(j) = rng.normal();

    const Eigen::MatrixXd anchor_gram = gram(spec, anchors).entries;
    const Eigen::LLT<Eigen::MatrixXd> llt(anchor_gram);
    if (llt.info() != Eigen::Success) continue;

    RkhsFunctionSample f;
    f.anchors = std::move(anchors);
    f.spec = spec;
    f.norm = r;
    // w = L^{-T} g points uniformly on the sphere of the anchor span. The
    // scale is calibrated against the measured Gram norm rather than |g|
    // (they agree in exact arithmetic) so |f| = r survives the forward error
    // of the solve when the anchor Gram is badly conditioned.
    f.weights = llt.matrixU().solve(g);
    const double measured_sq = f.weights.dot(anchor_gram * f.weights);
    if (!(measured_sq > 0.0) || !std::isfinite(measured_sq)) continue;
    f.weights *= r / std::sqrt(measured_sq);
    return f;
  }
  throw NumericalError("anchor Gram factorization failed repeatedly; anchors may be degenerate");
}

RkhsFunctionSample sample_rkhs_function(const KernelSpec& spec, const Box& domain, int m,
                                        double r, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, {kFuncStream});
  return sample_rkhs_function(spec, domain, m, r, rng);
}

Eigen::VectorXd evaluate(const RkhsFunctionSample& f,
                         const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  if (f.weights.size() == 0) return Eigen::VectorXd::Zero(xs.cols());
  const Eigen::MatrixXd cross = cross_gram(f.spec, f.anchors, xs);
  return cross.transpose() * f.weights;
}

double evaluate_at(const RkhsFunctionSample& f, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return evaluate(f, Eigen::MatrixXd(x))(0);
}

NoiseModel NoiseModel::gaussian(double s) {
  NoiseModel model;
  model.family = Family::Gaussian;
  model.std_dev = s;
  return model;
}

NoiseModel NoiseModel::symmetric_mixture(double mu, double s) {
  NoiseModel model;
  model.family = Family::SymmetricMixture;
  model.std_dev = s;
  model.mixture_mean = mu;
  return model;
}

double NoiseModel::draw(Rng& rng) const {
  switch (family) {
    case Family::Gaussian:
      return std_dev * rng.normal();
    case Family::SymmetricMixture: {
      const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      return sign * mixture_mean + std_dev * rng.normal();
    }
  }
  throw ParameterError("unknown noise family");
}

MeanPair regime_functions(const RegimeSpec& regime, const PairSettings& settings,
                          std::uint64_t seed) {
  validate_settings(settings);
  const double parameter = regime_parameter(regime);

  Rng rng1 = Rng::derive(seed, {kMeanStream, 1});
  Rng rng2 = Rng::derive(seed, {kMeanStream, 2});

  MeanPair pair;
  pair.regime = regime.kind;
  pair.parameter = parameter;
  pair.noise1 = settings.noise;
  pair.noise2 = settings.noise;
  pair.f1 = sample_rkhs_function(settings.mean_spec, settings.domain, settings.mean_dim,
                                 settings.mean_norm, rng1);

  switch (regime.kind) {
    case Regime::Null:
      pair.f2 = pair.f1;
      break;
    case Regime::Shift: {
      // f2 = f1 + h with |h| = xi; anchors concatenate, so xi = 0 collapses
      // to the null pair up to zero-weight anchors.
      const RkhsFunctionSample h = sample_rkhs_function(
          settings.mean_spec, settings.domain, settings.mean_dim, parameter, rng2);
      pair.f2.spec = settings.mean_spec;
      pair.f2.anchors.resize(settings.domain.dim(), pair.f1.anchors.cols() + h.anchors.cols());
      pair.f2.anchors << pair.f1.anchors, h.anchors;
      pair.f2.weights.resize(pair.f1.weights.size() + h.weights.size());
      pair.f2.weights << pair.f1.weights, h.weights;
      pair.f2.norm = std::sqrt(std::max(
          0.0, pair.f1.norm * pair.f1.norm + 2.0 * rkhs_inner(pair.f1, h) + h.norm * h.norm));
      break;
    }
    case Regime::Rare: {
      // f2 = f1 + k(., 0): the bump only matters where covariates rarely land.
      pair.f2.spec = settings.mean_spec;
      pair.f2.anchors.resize(settings.domain.dim(), pair.f1.anchors.cols() + 1);
      pair.f2.anchors << pair.f1.anchors, Eigen::VectorXd::Zero(settings.domain.dim());
      pair.f2.weights.resize(pair.f1.weights.size() + 1);
      pair.f2.weights << pair.f1.weights, 1.0;
      RkhsFunctionSample bump;
      bump.spec = settings.mean_spec;
      bump.anchors = Eigen::MatrixXd::Zero(settings.domain.dim(), 1);
      bump.weights = Eigen::VectorXd::Ones(1);
      const double bump_sq = evaluate(settings.mean_spec, bump.anchors.col(0), bump.anchors.col(0));
      pair.f2.norm = std::sqrt(std::max(
          0.0, pair.f1.norm * pair.f1.norm + 2.0 * rkhs_inner(pair.f1, bump) + bump_sq));
      break;
    }
    case Regime::NoiseMixture:
      pair.f2 = pair.f1;
      pair.noise2 = NoiseModel::symmetric_mixture(parameter, settings.noise.std_dev);
      break;
    case Regime::Independent:
      pair.f2 = sample_rkhs_function(settings.mean_spec, settings.domain, settings.mean_dim,
                                     settings.mean_norm, rng2);
      break;
  }
  return pair;
}

std::pair<DataSet, DataSet> synthesize_pair(const MeanPair& means, int n,
                                            const PairSettings& settings,
                                            std::uint64_t seed) {
  validate_settings(settings);
  if (n < 0) throw InputError("sample count must be nonnegative");

  const auto make_set = [&](const RkhsFunctionSample& f, const NoiseModel& noise,
                            std::uint64_t side) {
    Rng rng = Rng::derive(seed, {kDataStream, side});
    DataSet data;
    data.covariates.resize(settings.domain.dim(), n);
    for (int i = 0; i < n; ++i) {
      data.covariates.col(i) =
          means.regime == Regime::Rare
              ? mixture_point(settings.domain, settings.mean_spec, means.parameter, rng)
              : uniform_point(settings.domain, rng);
    }
    data.measurements.resize(1, n);
    if (n > 0) data.measurements.row(0) = evaluate(f, data.covariates).transpose();
    for (int i = 0; i < n; ++i) data.measurements(0, i) += noise.draw(rng);
    return data;
  };

  return {make_set(means.f1, means.noise1, 1), make_set(means.f2, means.noise2, 2)};
}

std::pair<DataSet, DataSet> generate_pair(const RegimeSpec& regime, int n,
                                          const PairSettings& settings, std::uint64_t seed) {
  const MeanPair means =
      regime_functions(regime, settings, Rng::mix(seed, {kPairStream, 1}));
  return synthesize_pair(means, n, settings, Rng::mix(seed, {kPairStream, 2}));
}

}  // namespace cmmd
