#include "agepath/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>

namespace agepath {

namespace {
constexpr double kQrCut = 1e-8;
}  // namespace

bool all_finite(const Vector& v) { return v.allFinite(); }

PinvSolution pinv_solve_ex(const Matrix& A, const Vector& b, double rank_tol) {
  if (A.rows() != b.size())
    throw std::invalid_argument("pinv_solve: A has " + std::to_string(A.rows()) +
                                " rows but b has " + std::to_string(b.size()));
  PinvSolution out;
  out.x = Vector::Zero(A.cols());
  if (A.size() == 0) return out;
  if (!A.allFinite() || !b.allFinite()) throw NumericalError("pinv_solve: non-finite input");

  // Square and comfortably nonsingular: the pseudoinverse solution is the
  // unique one, and a pivoted QR finds it an order of magnitude faster.
  if (A.rows() == A.cols()) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    const auto R = qr.matrixQR().diagonal().cwiseAbs();
    if (R.size() && R(R.size() - 1) > kQrCut * R(0)) {
      out.x = qr.solve(b);
      out.rank = A.rows();
      if (out.x.allFinite()) return out;
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("pinv_solve: SVD did not converge");

  const Vector& s = svd.singularValues();
  const double cut = s.size() ? rank_tol * s(0) : 0.0;
  Vector ub = svd.matrixU().transpose() * b;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut && s(i) > 0.0) {
      ub(i) /= s(i);
      ++out.rank;
    } else {
      ub(i) = 0.0;
    }
  }
  out.x = svd.matrixV() * ub;
  out.rank_deficient = out.rank < std::min(A.rows(), A.cols());
  return out;
}

}  // namespace agepath
