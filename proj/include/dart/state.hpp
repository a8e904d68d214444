#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace dart {

// kDart: covariate-informed model (descriptor submodel for W, ontology
// regression and log-normal local scales for the loadings).
// kDartNc: no-covariate variant (unit local scales, eta sd sigma_eta).
enum class ModelKind { kDart, kDartNc };

struct ModelOptions {
  // Replace the log-normal local scales by 1 (exact no-covariate nesting
  // check / ablation). Implied for kDartNc.
  bool unit_local_scales = false;
  // Jitter added to the kernel diagonal before factorization.
  double kernel_jitter = 1e-8;
};

// Offsets of each block inside the flat unconstrained vector. Positive
// quantities (delta, tau0, phi, tau_gamma) live on the log scale; all other
// blocks are stored directly.
struct ParamLayout {
  ModelKind kind = ModelKind::kDartNc;
  int n_chems = 0;    // N
  int n_genes = 0;    // M
  int n_doses = 0;    // D
  int n_factors = 0;  // K
  int n_w = 0;        // P (0 when absent)
  int n_z = 0;        // Q (0 when absent)
  bool has_phi = false;

  int mu_off = 0;          // M*D, gene-major
  int lambda_raw_off = 0;  // M*K*D, (gene, factor)-major
  int eta_off = 0;         // N*K
  int log_delta_off = 0;   // K
  int log_tau0_off = 0;    // 1
  int log_phi_off = 0;     // M*K when has_phi
  int beta_off = 0;        // K*Q when has_phi and Q > 0
  int theta_off = 0;       // P*K when P > 0
  int mu_c_off = 0;        // P when P > 0
  int alpha_noise_off = 0;
  int beta_noise_off = 0;
  int gamma_gene_off = 0;  // M
  int log_tau_gamma_off = 0;
  int size = 0;

  int beta_cols() const { return has_phi ? n_z : 0; }
};

ParamLayout make_layout(ModelKind kind, int n_chems, int n_genes, int n_doses,
                        int n_factors, int n_w, int n_z,
                        bool unit_local_scales = false);

// Structured view of one point in parameter space (natural, not whitened,
// except lambda_raw which holds the whitened loading coefficients).
struct LatentState {
  Eigen::MatrixXd mu;                      // M x D
  std::vector<Eigen::MatrixXd> lambda_raw; // per gene: D x K
  Eigen::MatrixXd eta;                     // N x K
  Eigen::VectorXd log_delta;               // K
  double log_tau0 = 0.0;
  Eigen::MatrixXd log_phi;                 // M x K (empty unless has_phi)
  Eigen::MatrixXd beta;                    // K x Q
  Eigen::MatrixXd theta;                   // P x K
  Eigen::VectorXd mu_c;                    // P
  double alpha_noise = 0.0;
  double beta_noise = 0.0;
  Eigen::VectorXd gamma_gene;              // M
  double log_tau_gamma = 0.0;
};

Eigen::VectorXd pack_state(const LatentState& state, const ParamLayout& layout);
LatentState unpack_state(const Eigen::VectorXd& x, const ParamLayout& layout);

// Human-readable name of one flat-vector position, e.g. "mu[3,0]".
std::string param_name(const ParamLayout& layout, int index);

}  // namespace dart
