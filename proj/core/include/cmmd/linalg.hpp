#ifndef CMMD_LINALG_HPP
#define CMMD_LINALG_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

namespace cmmd {

struct CholeskyInfo {
  double jitter = 0.0;  // total diagonal shift that was needed
  int escalations = 0;
};

// In-place lower Cholesky of a symmetric positive definite matrix with a
// diagonal jitter fallback: on failure add 1e-12 * trace/n to the diagonal,
// escalate by 10x at most three times, then give up with NumericalError.
// Near-duplicate covariates at small lambda are the usual trigger.
// On return the strict upper triangle of `matrix` is unspecified.
CholeskyInfo cholesky_in_place(Eigen::MatrixXd& matrix, const char* context);

// Counts cholesky_in_place calls; lets tests assert how many factorizations
// a code path performs (e.g. the wild bootstrap performs exactly one).
std::uint64_t cholesky_count();

// alpha = (L L^T)^{-1} rhs via two triangular solves, in place in rhs.
void cholesky_solve_in_place(const Eigen::MatrixXd& chol_lower, Eigen::Ref<Eigen::MatrixXd> rhs);

// log det(L L^T) = 2 * sum(log diag(L)).
double cholesky_log_det(const Eigen::MatrixXd& chol_lower);

struct LowRankFactor {
  Eigen::MatrixXd factor;  // rank x n, with factor^T factor = G up to tol
  int rank = 0;
};

// Pivoted (greedy, diagonally pivoted) Cholesky of a PSD matrix G given only
// its diagonal and a column generator; stops when the residual trace falls
// below tol * max(1, initial trace) or at max_rank. G itself is never formed,
// so it works for large Gram matrices and exposes low output-kernel rank
// automatically (a linear kernel on R^q stops at rank q+1).
LowRankFactor pivoted_cholesky(const Eigen::VectorXd& diagonal,
                               const std::function<Eigen::VectorXd(int)>& column,
                               double tol = 1e-12, int max_rank = -1);

}  // namespace cmmd

#endif
