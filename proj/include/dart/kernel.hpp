#pragma once

#include <Eigen/Dense>

#include "dart/grid.hpp"

namespace dart {

// Squared-exponential kernel over the dose grid with its lower-triangular
// Cholesky factor. half_log_det = sum(log diag(L)).
struct KernelCholesky {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;
  double half_log_det = 0.0;
};

// cov(d, d') = exp(-(c_d - c_d')^2 / (2 l^2)) + jitter * I. Throws
// std::invalid_argument on bad inputs and std::runtime_error if the
// decomposition fails.
KernelCholesky kernel_matrix(const DoseGrid& grid, double length_scale,
                             double jitter = 1e-8);

}  // namespace dart
