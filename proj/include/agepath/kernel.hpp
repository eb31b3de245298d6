#pragma once

#include "agepath/dataset.hpp"

namespace agepath {

enum class KernelKind { linear, gaussian };

struct Kernel {
  KernelKind kind = KernelKind::gaussian;
  double gamma = 1.0;  // gaussian width, exp(-gamma |x - z|^2)
};

Matrix kernel_matrix(const Dataset& ds, const Kernel& k);
// K(a_i, b_j) for every pair of rows.
Matrix cross_kernel(const Matrix& A, const Matrix& B, const Kernel& k);

}  // namespace agepath
