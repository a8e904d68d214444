#pragma once

#include <Eigen/Dense>

namespace dart {

// Differentiable unnormalized log density over an unconstrained vector.
// Samplers depend only on this interface.
class LogDensityModel {
 public:
  virtual ~LogDensityModel() = default;
  virtual int dim() const = 0;
  // Returns log density at x; when grad is non-null it is resized and filled
  // with the gradient.
  virtual double log_density_gradient(const Eigen::VectorXd& x,
                                      Eigen::VectorXd* grad) const = 0;
};

}  // namespace dart
