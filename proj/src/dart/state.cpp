#include "dart/state.hpp"

#include <stdexcept>

namespace dart {

ParamLayout make_layout(ModelKind kind, int n_chems, int n_genes, int n_doses,
                        int n_factors, int n_w, int n_z, bool unit_local_scales) {
  if (n_chems < 1 || n_genes < 1 || n_doses < 1 || n_factors < 1)
    throw std::invalid_argument("make_layout: dimensions must be positive");
  if (n_w < 0 || n_z < 0)
    throw std::invalid_argument("make_layout: covariate widths must be >= 0");

  ParamLayout lay;
  lay.kind = kind;
  lay.n_chems = n_chems;
  lay.n_genes = n_genes;
  lay.n_doses = n_doses;
  lay.n_factors = n_factors;
  if (kind == ModelKind::kDartNc) {
    lay.n_w = 0;
    lay.n_z = 0;
    lay.has_phi = false;
  } else {
    lay.n_w = n_w;
    lay.n_z = n_z;
    lay.has_phi = !unit_local_scales;
  }

  int off = 0;
  lay.mu_off = off;
  off += n_genes * n_doses;
  lay.lambda_raw_off = off;
  off += n_genes * n_factors * n_doses;
  lay.eta_off = off;
  off += n_chems * n_factors;
  lay.log_delta_off = off;
  off += n_factors;
  lay.log_tau0_off = off;
  off += 1;
  lay.log_phi_off = off;
  if (lay.has_phi) off += n_genes * n_factors;
  lay.beta_off = off;
  if (lay.has_phi && lay.n_z > 0) off += n_factors * lay.n_z;
  lay.theta_off = off;
  if (lay.n_w > 0) off += lay.n_w * n_factors;
  lay.mu_c_off = off;
  if (lay.n_w > 0) off += lay.n_w;
  lay.alpha_noise_off = off;
  off += 1;
  lay.beta_noise_off = off;
  off += 1;
  lay.gamma_gene_off = off;
  off += n_genes;
  lay.log_tau_gamma_off = off;
  off += 1;
  lay.size = off;
  return lay;
}

Eigen::VectorXd pack_state(const LatentState& s, const ParamLayout& lay) {
  const int M = lay.n_genes, D = lay.n_doses, K = lay.n_factors, N = lay.n_chems;
  if (s.mu.rows() != M || s.mu.cols() != D)
    throw std::invalid_argument("pack_state: mu shape mismatch");
  if (static_cast<int>(s.lambda_raw.size()) != M)
    throw std::invalid_argument("pack_state: lambda_raw gene count mismatch");
  if (s.eta.rows() != N || s.eta.cols() != K)
    throw std::invalid_argument("pack_state: eta shape mismatch");
  if (s.log_delta.size() != K)
    throw std::invalid_argument("pack_state: log_delta size mismatch");

  Eigen::VectorXd x(lay.size);
  for (int j = 0; j < M; ++j)
    for (int d = 0; d < D; ++d) x[lay.mu_off + j * D + d] = s.mu(j, d);
  for (int j = 0; j < M; ++j) {
    const Eigen::MatrixXd& a = s.lambda_raw[j];
    if (a.rows() != D || a.cols() != K)
      throw std::invalid_argument("pack_state: lambda_raw block shape mismatch");
    for (int k = 0; k < K; ++k)
      for (int d = 0; d < D; ++d)
        x[lay.lambda_raw_off + (j * K + k) * D + d] = a(d, k);
  }
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k) x[lay.eta_off + i * K + k] = s.eta(i, k);
  for (int k = 0; k < K; ++k) x[lay.log_delta_off + k] = s.log_delta[k];
  x[lay.log_tau0_off] = s.log_tau0;
  if (lay.has_phi) {
    if (s.log_phi.rows() != M || s.log_phi.cols() != K)
      throw std::invalid_argument("pack_state: log_phi shape mismatch");
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < K; ++k) x[lay.log_phi_off + j * K + k] = s.log_phi(j, k);
    if (lay.n_z > 0) {
      if (s.beta.rows() != K || s.beta.cols() != lay.n_z)
        throw std::invalid_argument("pack_state: beta shape mismatch");
      for (int k = 0; k < K; ++k)
        for (int q = 0; q < lay.n_z; ++q) x[lay.beta_off + k * lay.n_z + q] = s.beta(k, q);
    }
  }
  if (lay.n_w > 0) {
    if (s.theta.rows() != lay.n_w || s.theta.cols() != K)
      throw std::invalid_argument("pack_state: theta shape mismatch");
    if (s.mu_c.size() != lay.n_w)
      throw std::invalid_argument("pack_state: mu_c size mismatch");
    for (int p = 0; p < lay.n_w; ++p)
      for (int k = 0; k < K; ++k) x[lay.theta_off + p * K + k] = s.theta(p, k);
    for (int p = 0; p < lay.n_w; ++p) x[lay.mu_c_off + p] = s.mu_c[p];
  }
  x[lay.alpha_noise_off] = s.alpha_noise;
  x[lay.beta_noise_off] = s.beta_noise;
  if (s.gamma_gene.size() != M)
    throw std::invalid_argument("pack_state: gamma_gene size mismatch");
  for (int j = 0; j < M; ++j) x[lay.gamma_gene_off + j] = s.gamma_gene[j];
  x[lay.log_tau_gamma_off] = s.log_tau_gamma;
  return x;
}

LatentState unpack_state(const Eigen::VectorXd& x, const ParamLayout& lay) {
  if (x.size() != lay.size)
    throw std::invalid_argument("unpack_state: vector size mismatch");
  const int M = lay.n_genes, D = lay.n_doses, K = lay.n_factors, N = lay.n_chems;
  LatentState s;
  s.mu.resize(M, D);
  for (int j = 0; j < M; ++j)
    for (int d = 0; d < D; ++d) s.mu(j, d) = x[lay.mu_off + j * D + d];
  s.lambda_raw.assign(M, Eigen::MatrixXd(D, K));
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < K; ++k)
      for (int d = 0; d < D; ++d)
        s.lambda_raw[j](d, k) = x[lay.lambda_raw_off + (j * K + k) * D + d];
  s.eta.resize(N, K);
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k) s.eta(i, k) = x[lay.eta_off + i * K + k];
  s.log_delta.resize(K);
  for (int k = 0; k < K; ++k) s.log_delta[k] = x[lay.log_delta_off + k];
  s.log_tau0 = x[lay.log_tau0_off];
  if (lay.has_phi) {
    s.log_phi.resize(M, K);
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < K; ++k) s.log_phi(j, k) = x[lay.log_phi_off + j * K + k];
    if (lay.n_z > 0) {
      s.beta.resize(K, lay.n_z);
      for (int k = 0; k < K; ++k)
        for (int q = 0; q < lay.n_z; ++q) s.beta(k, q) = x[lay.beta_off + k * lay.n_z + q];
    }
  }
  if (lay.n_w > 0) {
    s.theta.resize(lay.n_w, K);
    s.mu_c.resize(lay.n_w);
    for (int p = 0; p < lay.n_w; ++p)
      for (int k = 0; k < K; ++k) s.theta(p, k) = x[lay.theta_off + p * K + k];
    for (int p = 0; p < lay.n_w; ++p) s.mu_c[p] = x[lay.mu_c_off + p];
  }
  s.alpha_noise = x[lay.alpha_noise_off];
  s.beta_noise = x[lay.beta_noise_off];
  s.gamma_gene.resize(M);
  for (int j = 0; j < M; ++j) s.gamma_gene[j] = x[lay.gamma_gene_off + j];
  s.log_tau_gamma = x[lay.log_tau_gamma_off];
  return s;
}

std::string param_name(const ParamLayout& lay, int index) {
  if (index < 0 || index >= lay.size) throw std::invalid_argument("param_name: index out of range");
  const int D = lay.n_doses, K = lay.n_factors;
  auto idx2 = [](const char* base, int a, int b) {
    return std::string(base) + "[" + std::to_string(a) + "," + std::to_string(b) + "]";
  };
  if (index < lay.lambda_raw_off) {
    const int r = index - lay.mu_off;
    return idx2("mu", r / D, r % D);
  }
  if (index < lay.eta_off) {
    const int r = index - lay.lambda_raw_off;
    const int jk = r / D;
    return "lambda_raw[" + std::to_string(jk / K) + "," + std::to_string(jk % K) + "," +
           std::to_string(r % D) + "]";
  }
  if (index < lay.log_delta_off) {
    const int r = index - lay.eta_off;
    return idx2("eta", r / K, r % K);
  }
  if (index < lay.log_tau0_off)
    return "log_delta[" + std::to_string(index - lay.log_delta_off) + "]";
  if (index == lay.log_tau0_off) return "log_tau0";
  if (lay.has_phi && index >= lay.log_phi_off && index < lay.log_phi_off + lay.n_genes * K) {
    const int r = index - lay.log_phi_off;
    return idx2("log_phi", r / K, r % K);
  }
  if (lay.has_phi && lay.n_z > 0 && index >= lay.beta_off && index < lay.beta_off + K * lay.n_z) {
    const int r = index - lay.beta_off;
    return idx2("beta", r / lay.n_z, r % lay.n_z);
  }
  if (lay.n_w > 0 && index >= lay.theta_off && index < lay.theta_off + lay.n_w * K) {
    const int r = index - lay.theta_off;
    return idx2("theta", r / K, r % K);
  }
  if (lay.n_w > 0 && index >= lay.mu_c_off && index < lay.mu_c_off + lay.n_w)
    return "mu_c[" + std::to_string(index - lay.mu_c_off) + "]";
  if (index == lay.alpha_noise_off) return "alpha_noise";
  if (index == lay.beta_noise_off) return "beta_noise";
  if (index >= lay.gamma_gene_off && index < lay.gamma_gene_off + lay.n_genes)
    return "gamma_gene[" + std::to_string(index - lay.gamma_gene_off) + "]";
  return "log_tau_gamma";
}

}  // namespace dart
