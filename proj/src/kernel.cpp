#include "agepath/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace agepath {

Matrix cross_kernel(const Matrix& A, const Matrix& B, const Kernel& k) {
  if (A.cols() != B.cols()) throw std::invalid_argument("kernel: feature dimension mismatch");
  Matrix G = A * B.transpose();
  if (k.kind == KernelKind::linear) return G;
  if (!(k.gamma > 0.0)) throw std::invalid_argument("gaussian kernel needs gamma > 0");
  const Vector a2 = A.rowwise().squaredNorm();
  const Vector b2 = B.rowwise().squaredNorm();
  for (Eigen::Index i = 0; i < G.rows(); ++i)
    for (Eigen::Index j = 0; j < G.cols(); ++j)
      G(i, j) = std::exp(-k.gamma * std::max(0.0, a2(i) + b2(j) - 2.0 * G(i, j)));
  return G;
}

Matrix kernel_matrix(const Dataset& ds, const Kernel& k) {
  Matrix K = cross_kernel(ds.X(), ds.X(), k);
  // exact symmetry and unit diagonal regardless of rounding in the expansion
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    if (k.kind == KernelKind::gaussian) K(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) K(i, j) = K(j, i);
  }
  return K;
}

}  // namespace agepath
