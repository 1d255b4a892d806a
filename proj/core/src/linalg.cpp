#include "cmmd/linalg.hpp"

#include <Eigen/Cholesky>
#include <atomic>
#include <cmath>
#include <string>

#include "cmmd/errors.hpp"

namespace cmmd {

namespace {
std::atomic<std::uint64_t> g_cholesky_calls{0};
}

std::uint64_t cholesky_count() { return g_cholesky_calls.load(); }

CholeskyInfo cholesky_in_place(Eigen::MatrixXd& matrix, const char* context) {
  g_cholesky_calls.fetch_add(1, std::memory_order_relaxed);
  CholeskyInfo info;
  const auto n = matrix.rows();
  if (n == 0) return info;

  double base = 1e-12 * matrix.trace() / static_cast<double>(n);
  if (!(base > 0.0)) base = 1e-300;  // zero-trace inputs still get a usable step

  Eigen::MatrixXd attempt;
  for (int escalation = 0; escalation <= 3; ++escalation) {
    attempt = matrix;
    if (info.jitter > 0.0) attempt.diagonal().array() += info.jitter;
    const auto status = Eigen::internal::llt_inplace<double, Eigen::Lower>::blocked(attempt);
    if (status == -1) {  // success: no pivot failed
      matrix = attempt;
      info.escalations = escalation;
      return info;
    }
    info.jitter = (info.jitter == 0.0) ? base : info.jitter * 10.0;
  }
  throw NumericalError(std::string(context) +
                       ": Cholesky factorization failed after jitter escalation");
}

void cholesky_solve_in_place(const Eigen::MatrixXd& chol_lower, Eigen::Ref<Eigen::MatrixXd> rhs) {
  chol_lower.triangularView<Eigen::Lower>().solveInPlace(rhs);
  chol_lower.transpose().triangularView<Eigen::Upper>().solveInPlace(rhs);
}

double cholesky_log_det(const Eigen::MatrixXd& chol_lower) {
  return 2.0 * chol_lower.diagonal().array().log().sum();
}

LowRankFactor pivoted_cholesky(const Eigen::VectorXd& diagonal,
                               const std::function<Eigen::VectorXd(int)>& column,
                               double tol, int max_rank) {
  const int n = static_cast<int>(diagonal.size());
  if (max_rank < 0 || max_rank > n) max_rank = n;

  Eigen::VectorXd residual = diagonal;
  const double initial = residual.sum();
  const double cutoff = tol * std::max(1.0, initial);

  LowRankFactor out;
  out.factor.resize(max_rank, n);

  int r = 0;
  while (r < max_rank) {
    int pivot = 0;
    const double best = residual.maxCoeff(&pivot);
    if (!(best > 0.0) || residual.sum() <= cutoff) break;

    Eigen::VectorXd col = column(pivot);
    if (r > 0) col.noalias() -= out.factor.topRows(r).transpose() * out.factor.topRows(r).col(pivot);

    const double scale = std::sqrt(best);
    out.factor.row(r) = (col / scale).transpose();
    out.factor(r, pivot) = scale;  // exact diagonal entry, immune to roundoff in col

    residual -= out.factor.row(r).array().square().matrix().transpose();
    residual = residual.cwiseMax(0.0);
    residual(pivot) = 0.0;
    ++r;
  }

  out.factor.conservativeResize(r, n);
  out.rank = r;
  return out;
}

}  // namespace cmmd
