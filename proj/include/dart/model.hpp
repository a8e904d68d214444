#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "dart/data.hpp"
#include "dart/hyper.hpp"
#include "dart/kernel.hpp"
#include "dart/logdensity.hpp"
#include "dart/state.hpp"

namespace dart {

// Column shrinkage weights gamma_k = prod_{s<=k} 1/delta_s.
Eigen::VectorXd mgp_column_scales(const Eigen::VectorXd& delta);

// sigma^2 = exp(alpha + gamma_j + beta_dose * (coord - coord_mean)).
double noise_variance(double alpha, double gamma_j, double beta_dose,
                      double coord, double coord_mean);

// Natural-scale loadings Lambda_j (D x K per gene) rebuilt from the whitened
// coefficients, the kernel Cholesky factor and the shrinkage scales. Local
// scales phi are applied when state.log_phi is non-empty.
std::vector<Eigen::MatrixXd> loadings(const LatentState& state, const DoseGrid& grid,
                                      const Hyperparameters& hyper,
                                      double kernel_jitter = 1e-8);

// Noise-free surface S(i, j, d) = mu_jd + (Lambda_j eta_i)_d.
MeanEffect mean_effect(const LatentState& state, const DoseGrid& grid,
                       const Hyperparameters& hyper, double kernel_jitter = 1e-8);

// Gaussian response log likelihood and joint log prior as standalone
// operations; both are exact (all normalizing constants included).
double log_likelihood(const LatentState& state, const ObservationSet& data,
                      const Hyperparameters& hyper);
double log_prior(const LatentState& state, const CovariateSet& covariates,
                 const DoseGrid& grid, const Hyperparameters& hyper,
                 ModelKind kind, const ModelOptions& options = {});

// Joint posterior over the unconstrained parameter vector. Immutable after
// construction; evaluation is const and thread-safe.
class DartModel final : public LogDensityModel {
 public:
  DartModel(ObservationSet data, CovariateSet covariates, Hyperparameters hyper,
            ModelKind kind, int n_factors, ModelOptions options = {});

  int dim() const override { return layout_.size; }
  double log_density_gradient(const Eigen::VectorXd& x,
                              Eigen::VectorXd* grad) const override;

  // Likelihood / prior split evaluated at the same point (their sum equals
  // log_density_gradient's value).
  double log_likelihood_at(const Eigen::VectorXd& x) const;
  double log_prior_at(const Eigen::VectorXd& x) const;

  // Per-cell log likelihood (replicates summed), in data().cells order.
  Eigen::VectorXd pointwise_loglik(const Eigen::VectorXd& x) const;
  // Per-cell mean-effect value and noise variance, in data().cells order.
  void predictive_params(const Eigen::VectorXd& x, Eigen::VectorXd* cell_mean,
                         Eigen::VectorXd* cell_var) const;

  MeanEffect mean_effect_at(const Eigen::VectorXd& x) const;

  const ParamLayout& layout() const { return layout_; }
  const ObservationSet& data() const { return data_; }
  const CovariateSet& covariates() const { return cov_; }
  const Hyperparameters& hyper() const { return hyper_; }
  const KernelCholesky& kernel() const { return kernel_; }
  double dose_coord_mean() const { return coord_mean_; }

  // Worker threads for the per-gene likelihood pass. Results are identical
  // for any value: partials are reduced serially in gene order.
  void set_threads(int n);

 private:
  struct GenePartial;
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd* grad, double* ll_out,
              double* prior_out) const;
  void gene_pass(const Eigen::VectorXd& x, int gene, bool want_grad,
                 Eigen::VectorXd* grad, GenePartial& out) const;

  ObservationSet data_;
  CovariateSet cov_;
  Hyperparameters hyper_;
  ModelOptions options_;
  ParamLayout layout_;
  KernelCholesky kernel_;
  Eigen::MatrixXd kernel_inv_;
  Eigen::VectorXd coord_centered_;
  double coord_mean_ = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> gene_ranges_;
  int threads_ = 1;
};

}  // namespace dart
