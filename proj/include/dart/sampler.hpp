#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dart/logdensity.hpp"
#include "dart/rng.hpp"

namespace dart {

struct SamplerConfig {
  int chains = 1;
  int warmup = 1000;
  int samples = 1000;      // post-warmup iterations per chain
  int thin = 1;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  double init_scale = 0.1;  // initial positions ~ U(-init_scale, init_scale)
  std::uint64_t seed = 0;
  int threads = 1;  // worker cap for running chains concurrently
};

struct ChainStats {
  std::uint64_t seed = 0;
  double step_size = 0.0;
  double mean_accept = 0.0;
  int divergences = 0;  // post-warmup
  int max_depth_hits = 0;
  Eigen::VectorXd inv_mass;
};

// Post-warmup draws in chain-major order (all of chain 0, then chain 1, ...).
struct PosteriorDraws {
  int dim = 0;
  std::vector<Eigen::VectorXd> draws;
  std::vector<double> log_post;
  std::vector<std::uint8_t> divergent;
  std::vector<int> chain;
  std::vector<ChainStats> chain_stats;

  std::size_t size() const { return draws.size(); }
  int n_divergent() const;
  double divergent_fraction() const;
  // More than 10% divergent transitions: results should not be trusted.
  bool divergence_warning() const { return divergent_fraction() > 0.10; }
};

// One leapfrog update of (position, momentum) in place. gradient_fn must fill
// its second argument with the log-density gradient. inv_mass of size 0 means
// the identity metric.
template <typename GradFn>
void leapfrog(Eigen::VectorXd& position, Eigen::VectorXd& momentum, double step_size,
              GradFn&& gradient_fn, const Eigen::VectorXd& inv_mass = Eigen::VectorXd()) {
  Eigen::VectorXd grad(position.size());
  gradient_fn(position, grad);
  momentum += 0.5 * step_size * grad;
  if (inv_mass.size() > 0)
    position += step_size * inv_mass.cwiseProduct(momentum);
  else
    position += step_size * momentum;
  gradient_fn(position, grad);
  momentum += 0.5 * step_size * grad;
}

// Single no-U-turn chain with dual-averaging step size and diagonal mass
// adaptation. Deterministic given config.seed.
PosteriorDraws run_chain(const LogDensityModel& model, const SamplerConfig& config);

// config.chains chains with seeds derived from config.seed; chain c of a
// multi-chain run is identical to a single-chain run seeded the same way.
PosteriorDraws run_chains(const LogDensityModel& model, const SamplerConfig& config);

}  // namespace dart
