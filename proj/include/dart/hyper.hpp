#pragma once

#include <cmath>
#include <stdexcept>

namespace dart {

enum class Tau0Prior {
  kGamma,         // tau0 ~ Gamma(tau0_a, tau0_b)
  kInverseGamma,  // 1/tau0 ~ Gamma(tau0_a, tau0_b)
};

// Fixed prior constants. Defaults reproduce the simulation-study settings;
// pfas_preset() switches to the values used for the PFAS screening analysis.
struct Hyperparameters {
  // Loading-kernel length scale (shared squared-exponential kernel).
  double length_scale = 1.0;
  // Multiplicative-gamma shrinkage: delta_1 ~ Gamma(a1, b1), later columns
  // Gamma(a2, b2).
  double mgp_a1 = 2.0;
  double mgp_b1 = 1.0;
  double mgp_a2 = 2.0;
  double mgp_b2 = 1.0;
  // Global loading scale tau0.
  Tau0Prior tau0_prior = Tau0Prior::kGamma;
  double tau0_a = 2.0;
  double tau0_b = 1.0;
  // Log-normal local scales phi_jk: sd of log phi around z_j' beta_k - sd^2/2.
  double sigma_phi = 0.25;
  // Ontology regression coefficients beta_kq ~ N(0, sigma_beta^2).
  double sigma_beta = 0.5;
  // Factor scores when the chemical-descriptor submodel is absent.
  double sigma_eta = 1.0;
  // Descriptor submodel: intercept and slope prior sds.
  double sigma_w = 1.0;
  double sigma_theta = 1.0;
  // Noise model: log sigma^2 = alpha + gamma_j + beta_dose * (coord - mean).
  double alpha_noise_mean = std::log(0.15);
  double alpha_noise_sd = 0.5;
  double beta_noise_mean = 0.0;
  double beta_noise_sd = 0.05;
  double tau_gamma_scale = 0.5;  // half-normal scale for the gene-effect sd

  void validate() const {
    auto pos = [](double x) { return std::isfinite(x) && x > 0.0; };
    if (!pos(length_scale)) throw std::invalid_argument("hyper: length_scale must be > 0");
    if (!pos(mgp_a1) || !pos(mgp_b1) || !pos(mgp_a2) || !pos(mgp_b2))
      throw std::invalid_argument("hyper: shrinkage gamma parameters must be > 0");
    if (!pos(tau0_a) || !pos(tau0_b)) throw std::invalid_argument("hyper: tau0 parameters must be > 0");
    if (!pos(sigma_phi) || !pos(sigma_beta) || !pos(sigma_eta) || !pos(sigma_w) ||
        !pos(sigma_theta) || !pos(alpha_noise_sd) || !pos(beta_noise_sd) ||
        !pos(tau_gamma_scale))
      throw std::invalid_argument("hyper: prior scales must be > 0");
    if (!std::isfinite(alpha_noise_mean) || !std::isfinite(beta_noise_mean))
      throw std::invalid_argument("hyper: prior means must be finite");
  }
};

inline Hyperparameters pfas_preset() {
  Hyperparameters h;
  h.sigma_phi = 0.15;
  h.mgp_a1 = 5.0;
  h.mgp_b1 = 2.0;
  h.mgp_a2 = 5.0;
  h.mgp_b2 = 2.5;
  h.tau0_a = 3.0;
  h.tau0_b = 2.0;
  return h;
}

}  // namespace dart
