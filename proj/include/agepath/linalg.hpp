#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace agepath {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Raised when a numerical routine cannot produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PinvSolution {
  Vector x;
  Eigen::Index rank = 0;
  bool rank_deficient = false;
};

constexpr double kDefaultRankTol = 1e-12;

// Minimum-norm least-squares solution of A x = b via SVD. Singular values
// below rank_tol * sigma_max are dropped.
PinvSolution pinv_solve_ex(const Matrix& A, const Vector& b, double rank_tol = kDefaultRankTol);

inline Vector pinv_solve(const Matrix& A, const Vector& b, double rank_tol = kDefaultRankTol) {
  return pinv_solve_ex(A, b, rank_tol).x;
}

bool all_finite(const Vector& v);

}  // namespace agepath
