#include "dart/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace dart {

KernelCholesky kernel_matrix(const DoseGrid& grid, double length_scale, double jitter) {
  grid.validate();
  if (!(length_scale > 0.0) || !std::isfinite(length_scale))
    throw std::invalid_argument("kernel_matrix: length_scale must be > 0");
  if (jitter < 0.0 || !std::isfinite(jitter))
    throw std::invalid_argument("kernel_matrix: jitter must be >= 0");

  const int n = grid.size();
  KernelCholesky k;
  k.cov.resize(n, n);
  const double inv2l2 = 1.0 / (2.0 * length_scale * length_scale);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b <= a; ++b) {
      const double diff = grid.coords[a] - grid.coords[b];
      const double v = std::exp(-diff * diff * inv2l2);
      k.cov(a, b) = v;
      k.cov(b, a) = v;
    }
    k.cov(a, a) += jitter;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(k.cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("kernel_matrix: Cholesky decomposition failed");
  k.chol = llt.matrixL();
  k.half_log_det = k.chol.diagonal().array().log().sum();
  return k;
}

}  // namespace dart
