#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dart/data.hpp"
#include "dart/diagnostics.hpp"
#include "dart/model.hpp"
#include "dart/sampler.hpp"

namespace dart {

// One fitted model: the posterior draws plus everything needed to interpret
// them without the original DartModel.
struct DartFit {
  ParamLayout layout;
  DoseGrid grid;
  PosteriorDraws draws;
};

struct FitOptions {
  ModelKind kind = ModelKind::kDart;
  int n_factors = 5;
  Hyperparameters hyper;
  ModelOptions model;
  SamplerConfig sampler;
};

DartFit fit_dart(const ObservationSet& data, const CovariateSet& covariates,
                 const FitOptions& options);

// Posterior mean of the noise-free surface.
MeanEffect posterior_mean_effect(const DartModel& model, const PosteriorDraws& draws);

// draws x cells log-likelihood matrix in model.data().cells order.
Eigen::MatrixXd pointwise_loglik_matrix(const DartModel& model, const PosteriorDraws& draws);

// Simulated replicate means under the posterior predictive: entry (s, c)
// draws the mean of cells[c].responses.size() replicates at posterior draw
// s, i.e. N(S_c, sigma^2_c / R_c). Deterministic given seed.
Eigen::MatrixXd predictive_replicate_means(const DartModel& model, const PosteriorDraws& draws,
                                           const std::vector<ObservationCell>& cells,
                                           std::uint64_t seed);

// Mean-effect values of one surface at the given cells.
Eigen::VectorXd effect_at_cells(const MeanEffect& effect,
                                const std::vector<ObservationCell>& cells);
// Replicate means of the given cells.
Eigen::VectorXd replicate_means(const std::vector<ObservationCell>& cells);

// Pearson correlation between surface values and replicate means over cells.
double effect_correlation(const MeanEffect& effect, const std::vector<ObservationCell>& cells);

// Full evaluation against the training data and an optional held-out set:
// WAIC / PSIS-LOO on the training cells, CRPS and 90% interval coverage of
// the held-out replicate means, fit quality in and out of sample, and
// convergence summaries of the log posterior and every parameter.
MetricReport evaluate_fit(const DartModel& model, const PosteriorDraws& draws,
                          const ObservationSet* heldout, std::uint64_t predictive_seed = 7);

// Split draw sequences per chain for the convergence helpers (draws are in
// chain-major order). extract(s) maps a flat draw index to a value.
std::vector<std::vector<double>> per_chain_series(const PosteriorDraws& draws,
                                                  const std::vector<double>& values);

}  // namespace dart
