#ifndef CMMD_DYNAMICS_HPP
#define CMMD_DYNAMICS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cmmd/regression.hpp"
#include "cmmd/rng.hpp"

namespace cmmd {

// X_{n+1} = A X_n + eps_n, eps ~ N(0, noise_std^2 I).
struct LinearSystem {
  Eigen::MatrixXd dynamics;       // d x d, orthonormal when Haar-sampled
  double noise_std = 0.0;
  Eigen::VectorXd initial_state;  // default (1/sqrt(d)) * ones
};

// Haar draw from O(d): QR of an i.i.d. Gaussian matrix with the
// sign-of-R-diagonal correction. Includes both determinant components.
Eigen::MatrixXd haar_orthonormal(int d, Rng& rng);
LinearSystem random_orthonormal_system(int d, double noise_std, std::uint64_t seed);

// Transition pairs (X_n, X_{n+1}) for n = 0..steps-1: covariates are the
// states, measurements the successors (q = d).
DataSet simulate_system(const LinearSystem& sys, int steps, std::uint64_t seed);

struct PerturbationResult {
  Eigen::MatrixXd dynamics;        // A' = A expm((xi/|H|_1) H)
  double geodesic_distance = 0.0;  // |log(A' A'')|_HS, measured, not xi
};

// Rotates A along a random antisymmetric direction H = (B - B^T)/2 with B
// i.i.d. standard normal, step size xi in the Schatten-1 normalization
// |H|_1 (trace norm; the measured geodesic distance is reported since it
// generally differs from xi). xi = 0 returns A unchanged.
PerturbationResult perturb_dynamics(const Eigen::MatrixXd& A, double xi, std::uint64_t seed);

struct MonitorConfig {
  int reference_trajectories = 5;
  int reference_length = 400;
  int window = 50;
  int total_steps = 400;
  int change_step = 200;      // dynamics switch to A' after this step
  double perturbation = 2.0;  // xi
  int dimension = 2;
  double noise_std = 0.01;
  double lambda = 0.01;
  double alpha = 0.05;
  int replicates = 100;       // wild-bootstrap M, per side per step
  int threads = 1;
  double threshold_scale = 1.0;  // diagnostic inflation of both thresholds

  void validate() const;  // throws ParameterError
};

struct MonitorRecord {
  int step = 0;            // 1-based; the pair tested last is (X_{t-1}, X_t)
  double max_ratio = 0.0;  // max over window covariates of statistic/threshold
  double mean_ratio = 0.0;
  double mean_reference_scale = 0.0;  // window mean of sigma_ref, drift diagnostic
  bool warmup = false;     // window not yet filled
};

// Sliding-window change monitor: one reference fit over
// reference_trajectories x reference_length transition pairs, then per step a
// window fit, wild-bootstrap recalibration of both sides on the window
// covariates, and the ratio of the conditional discrepancy to the combined
// threshold. Downstream flags a change when a ratio exceeds 1; the window
// mean is the smoother alarm signal, the max the more sensitive one.
std::vector<MonitorRecord> monitor(const MonitorConfig& cfg, std::uint64_t seed);

}  // namespace cmmd

#endif
