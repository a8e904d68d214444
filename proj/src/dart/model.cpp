#include "dart/model.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace dart {

namespace {

constexpr double kLog2Pi = 1.837877066409345483560659472811;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;

double normal_logpdf_term(double resid_sq_sum, int n, double log_var) {
  return -0.5 * n * (kLog2Pi + log_var) - 0.5 * resid_sq_sum * std::exp(-log_var);
}

// log p(u) for delta = exp(u), delta ~ Gamma(shape, rate), including the
// Jacobian of the log transform.
double log_gamma_on_log_scale(double u, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + shape * u - rate * std::exp(u);
}

}  // namespace

Eigen::VectorXd mgp_column_scales(const Eigen::VectorXd& delta) {
  Eigen::VectorXd scales(delta.size());
  double running = 1.0;
  for (Eigen::Index k = 0; k < delta.size(); ++k) {
    if (!(delta[k] > 0.0) || !std::isfinite(delta[k]))
      throw std::invalid_argument("mgp_column_scales: delta entries must be positive");
    running /= delta[k];
    scales[k] = running;
  }
  return scales;
}

double noise_variance(double alpha, double gamma_j, double beta_dose, double coord,
                      double coord_mean) {
  return std::exp(alpha + gamma_j + beta_dose * (coord - coord_mean));
}

std::vector<Eigen::MatrixXd> loadings(const LatentState& state, const DoseGrid& grid,
                                      const Hyperparameters& hyper, double kernel_jitter) {
  const int M = static_cast<int>(state.lambda_raw.size());
  const int K = static_cast<int>(state.log_delta.size());
  const int D = grid.size();
  const bool has_phi = state.log_phi.size() > 0;
  if (has_phi && (state.log_phi.rows() != M || state.log_phi.cols() != K))
    throw std::invalid_argument("loadings: log_phi shape mismatch");

  const KernelCholesky kern = kernel_matrix(grid, hyper.length_scale, kernel_jitter);
  Eigen::VectorXd log_gamma(K);
  double run = 0.0;
  for (int k = 0; k < K; ++k) {
    run -= state.log_delta[k];
    log_gamma[k] = run;
  }

  std::vector<Eigen::MatrixXd> lam(M);
  for (int j = 0; j < M; ++j) {
    if (state.lambda_raw[j].rows() != D || state.lambda_raw[j].cols() != K)
      throw std::invalid_argument("loadings: lambda_raw block shape mismatch");
    lam[j].noalias() = kern.chol * state.lambda_raw[j];
    for (int k = 0; k < K; ++k) {
      const double lphi = has_phi ? state.log_phi(j, k) : 0.0;
      lam[j].col(k) *= std::exp(0.5 * (state.log_tau0 + log_gamma[k] + lphi));
    }
  }
  return lam;
}

MeanEffect mean_effect(const LatentState& state, const DoseGrid& grid,
                       const Hyperparameters& hyper, double kernel_jitter) {
  const int M = static_cast<int>(state.lambda_raw.size());
  const int N = static_cast<int>(state.eta.rows());
  const int D = grid.size();
  if (state.mu.rows() != M || state.mu.cols() != D)
    throw std::invalid_argument("mean_effect: mu shape mismatch");
  if (state.log_delta.size() != state.eta.cols())
    throw std::invalid_argument("mean_effect: log_delta size mismatch");

  const std::vector<Eigen::MatrixXd> lam = loadings(state, grid, hyper, kernel_jitter);
  MeanEffect s = MeanEffect::zeros(N, M, D);
  for (int j = 0; j < M; ++j) {
    // S_j = eta * lam_j' + 1 mu_j'
    s.by_gene[j].noalias() = state.eta * lam[j].transpose();
    s.by_gene[j].rowwise() += state.mu.row(j);
  }
  return s;
}

double log_likelihood(const LatentState& state, const ObservationSet& data,
                      const Hyperparameters& hyper) {
  hyper.validate();
  const MeanEffect s = mean_effect(state, data.grid, hyper);
  const double coord_mean = data.mean_dose_coord();
  double ll = 0.0;
  for (const auto& c : data.cells) {
    const double m = s(c.chem, c.gene, c.dose);
    const double log_var =
        state.alpha_noise + state.gamma_gene[c.gene] +
        state.beta_noise * (data.grid.coords[c.dose] - coord_mean);
    double sr2 = 0.0;
    for (double y : c.responses) {
      const double r = y - m;
      sr2 += r * r;
    }
    ll += normal_logpdf_term(sr2, static_cast<int>(c.responses.size()), log_var);
  }
  return ll;
}

double log_prior(const LatentState& state, const CovariateSet& covariates,
                 const DoseGrid& grid, const Hyperparameters& hyper, ModelKind kind,
                 const ModelOptions& options) {
  hyper.validate();
  const int M = static_cast<int>(state.lambda_raw.size());
  const int N = static_cast<int>(state.eta.rows());
  const int K = static_cast<int>(state.eta.cols());
  const int D = grid.size();
  const bool has_phi = kind == ModelKind::kDart && !options.unit_local_scales;
  const int P = kind == ModelKind::kDart ? static_cast<int>(covariates.w.cols()) : 0;
  const int Q = kind == ModelKind::kDart ? static_cast<int>(covariates.z.cols()) : 0;
  if (has_phi && (state.log_phi.rows() != M || state.log_phi.cols() != K))
    throw std::invalid_argument("log_prior: log_phi shape mismatch");
  if (P > 0 && (state.theta.rows() != P || state.theta.cols() != K || state.mu_c.size() != P))
    throw std::invalid_argument("log_prior: descriptor submodel shape mismatch");
  if (has_phi && Q > 0 && (state.beta.rows() != K || state.beta.cols() != Q))
    throw std::invalid_argument("log_prior: beta shape mismatch");

  const KernelCholesky kern = kernel_matrix(grid, hyper.length_scale, options.kernel_jitter);
  Eigen::LLT<Eigen::MatrixXd> llt(kern.cov);
  double lp = 0.0;

  // Gene baselines: mu_j ~ GP(0, C) on the dose grid.
  for (int j = 0; j < M; ++j) {
    const Eigen::VectorXd mj = state.mu.row(j).transpose();
    lp += -0.5 * mj.dot(llt.solve(mj)) - kern.half_log_det - 0.5 * D * kLog2Pi;
  }
  // Whitened loading coefficients.
  for (int j = 0; j < M; ++j)
    lp += -0.5 * state.lambda_raw[j].squaredNorm() -
          0.5 * static_cast<double>(D * K) * kLog2Pi;
  // Factor scores.
  const double sd_eta = (kind == ModelKind::kDart && P > 0) ? 1.0 : hyper.sigma_eta;
  lp += -0.5 * state.eta.squaredNorm() / (sd_eta * sd_eta) -
        N * K * std::log(sd_eta) - 0.5 * static_cast<double>(N) * K * kLog2Pi;
  // Descriptor submodel: W given eta plus its coefficient priors.
  if (P > 0) {
    Eigen::MatrixXd resid = covariates.w;
    resid.noalias() -= state.eta * state.theta.transpose();
    resid.rowwise() -= state.mu_c.transpose();
    lp += -0.5 * resid.squaredNorm() - 0.5 * static_cast<double>(N) * P * kLog2Pi;
    lp += -0.5 * state.theta.squaredNorm() / (hyper.sigma_theta * hyper.sigma_theta) -
          P * K * std::log(hyper.sigma_theta) - 0.5 * static_cast<double>(P) * K * kLog2Pi;
    lp += -0.5 * state.mu_c.squaredNorm() / (hyper.sigma_w * hyper.sigma_w) -
          P * std::log(hyper.sigma_w) - 0.5 * P * kLog2Pi;
  }
  // Local loading scales and the ontology regression.
  if (has_phi) {
    const double s2 = hyper.sigma_phi * hyper.sigma_phi;
    Eigen::MatrixXd center = Eigen::MatrixXd::Constant(M, K, -0.5 * s2);
    if (Q > 0) center.noalias() += covariates.z * state.beta.transpose();
    const Eigen::MatrixXd u = state.log_phi - center;
    lp += -0.5 * u.squaredNorm() / s2 - M * K * std::log(hyper.sigma_phi) -
          0.5 * static_cast<double>(M) * K * kLog2Pi;
    if (Q > 0)
      lp += -0.5 * state.beta.squaredNorm() / (hyper.sigma_beta * hyper.sigma_beta) -
            K * Q * std::log(hyper.sigma_beta) - 0.5 * static_cast<double>(K) * Q * kLog2Pi;
  }
  // Shrinkage stack (log scale, Jacobians included).
  for (int k = 0; k < K; ++k) {
    const double shape = k == 0 ? hyper.mgp_a1 : hyper.mgp_a2;
    const double rate = k == 0 ? hyper.mgp_b1 : hyper.mgp_b2;
    lp += log_gamma_on_log_scale(state.log_delta[k], shape, rate);
  }
  if (hyper.tau0_prior == Tau0Prior::kGamma) {
    lp += log_gamma_on_log_scale(state.log_tau0, hyper.tau0_a, hyper.tau0_b);
  } else {
    // 1/tau0 ~ Gamma(a, b) expressed on u = log tau0.
    lp += hyper.tau0_a * std::log(hyper.tau0_b) - std::lgamma(hyper.tau0_a) -
          hyper.tau0_a * state.log_tau0 - hyper.tau0_b * std::exp(-state.log_tau0);
  }
  // Noise model.
  auto normal_lp = [](double v, double mean, double sd) {
    const double z = (v - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * kLog2Pi;
  };
  lp += normal_lp(state.alpha_noise, hyper.alpha_noise_mean, hyper.alpha_noise_sd);
  lp += normal_lp(state.beta_noise, hyper.beta_noise_mean, hyper.beta_noise_sd);
  const double tau_gamma = std::exp(state.log_tau_gamma);
  for (int j = 0; j < M; ++j)
    lp += normal_lp(state.gamma_gene[j], 0.0, tau_gamma);
  const double hs = hyper.tau_gamma_scale;
  lp += std::log(2.0) - 0.5 * kLog2Pi - std::log(hs) -
        0.5 * tau_gamma * tau_gamma / (hs * hs) + state.log_tau_gamma;
  return lp;
}

struct DartModel::GenePartial {
  double ll = 0.0;
  Eigen::MatrixXd deta;     // N x K
  Eigen::RowVectorXd acol;  // K; d loglik / d log(theta-scale) per factor
  double h_sum = 0.0;       // d loglik / d alpha_noise
  double h_cc = 0.0;        // d loglik / d beta_noise
  void reset(int n, int k, bool want_grad) {
    ll = 0.0;
    h_sum = 0.0;
    h_cc = 0.0;
    if (want_grad) {
      deta.setZero(n, k);
      acol.setZero(k);
    }
  }
};

DartModel::DartModel(ObservationSet data, CovariateSet covariates, Hyperparameters hyper,
                     ModelKind kind, int n_factors, ModelOptions options)
    : data_(std::move(data)),
      cov_(std::move(covariates)),
      hyper_(std::move(hyper)),
      options_(options) {
  hyper_.validate();
  data_.finalize();
  cov_.validate(data_.n_chems, data_.n_genes);
  const int n_w = kind == ModelKind::kDart ? static_cast<int>(cov_.w.cols()) : 0;
  const int n_z = kind == ModelKind::kDart ? static_cast<int>(cov_.z.cols()) : 0;
  layout_ = make_layout(kind, data_.n_chems, data_.n_genes, data_.grid.size(), n_factors,
                        n_w, n_z, options_.unit_local_scales);
  kernel_ = kernel_matrix(data_.grid, hyper_.length_scale, options_.kernel_jitter);
  Eigen::LLT<Eigen::MatrixXd> llt(kernel_.cov);
  kernel_inv_ = llt.solve(Eigen::MatrixXd::Identity(data_.grid.size(), data_.grid.size()));
  coord_mean_ = data_.mean_dose_coord();
  coord_centered_.resize(data_.grid.size());
  for (int d = 0; d < data_.grid.size(); ++d)
    coord_centered_[d] = data_.grid.coords[d] - coord_mean_;
  gene_ranges_.resize(data_.n_genes);
  for (int j = 0; j < data_.n_genes; ++j) gene_ranges_[j] = data_.gene_range(j);
}

void DartModel::set_threads(int n) {
  if (n < 1) throw std::invalid_argument("DartModel::set_threads: need >= 1");
  threads_ = n;
}

void DartModel::gene_pass(const Eigen::VectorXd& x, int gene, bool want_grad,
                          Eigen::VectorXd* grad, GenePartial& out) const {
  const ParamLayout& lay = layout_;
  const int N = lay.n_chems, M = lay.n_genes, D = lay.n_doses, K = lay.n_factors;
  ConstRowMap mu(x.data() + lay.mu_off, M, D);
  ConstRowMap eta(x.data() + lay.eta_off, N, K);
  const double ltau0 = x[lay.log_tau0_off];
  const double alpha = x[lay.alpha_noise_off];
  const double beta_dose = x[lay.beta_noise_off];
  const double gg = x[lay.gamma_gene_off + gene];

  Eigen::VectorXd scale(K);
  {
    double lg = 0.0;
    for (int k = 0; k < K; ++k) {
      lg -= x[lay.log_delta_off + k];
      const double lphi = lay.has_phi ? x[lay.log_phi_off + gene * K + k] : 0.0;
      scale[k] = std::exp(0.5 * (ltau0 + lg + lphi));
    }
  }
  Eigen::Map<const Eigen::MatrixXd> araw(x.data() + lay.lambda_raw_off + gene * K * D, D, K);
  Eigen::MatrixXd lam = kernel_.chol * araw;
  for (int k = 0; k < K; ++k) lam.col(k) *= scale[k];

  Eigen::VectorXd log_var(D), inv_var(D);
  for (int d = 0; d < D; ++d) {
    log_var[d] = alpha + gg + beta_dose * coord_centered_[d];
    inv_var[d] = std::exp(-log_var[d]);
  }

  Eigen::MatrixXd t_acc;  // D x K: sum_i G_id eta_i
  Eigen::VectorXd h_acc;  // D: d loglik / d log sigma^2_d
  if (want_grad) {
    t_acc.setZero(D, K);
    h_acc.setZero(D);
  }

  const auto [lo, hi] = gene_ranges_[gene];
  for (std::size_t c = lo; c < hi; ++c) {
    const ObservationCell& cell = data_.cells[c];
    const int i = cell.chem, d = cell.dose;
    const double m = mu(gene, d) + lam.row(d).dot(eta.row(i));
    double sr = 0.0, sr2 = 0.0;
    for (double y : cell.responses) {
      const double r = y - m;
      sr += r;
      sr2 += r * r;
    }
    const int reps = static_cast<int>(cell.responses.size());
    out.ll += normal_logpdf_term(sr2, reps, log_var[d]);
    if (want_grad) {
      const double g = sr * inv_var[d];
      (*grad)[lay.mu_off + gene * D + d] += g;
      t_acc.row(d).noalias() += g * eta.row(i);
      out.deta.row(i).noalias() += g * lam.row(d);
      h_acc[d] += 0.5 * sr2 * inv_var[d] - 0.5 * reps;
    }
  }

  if (want_grad) {
    Eigen::Map<Eigen::MatrixXd> glraw(grad->data() + lay.lambda_raw_off + gene * K * D, D, K);
    const Eigen::MatrixXd ltt = kernel_.chol.transpose() * t_acc;
    for (int k = 0; k < K; ++k) {
      glraw.col(k).noalias() += scale[k] * ltt.col(k);
      const double a = 0.5 * t_acc.col(k).dot(lam.col(k));
      out.acol[k] = a;
      if (lay.has_phi) (*grad)[lay.log_phi_off + gene * K + k] += a;
    }
    out.h_sum = h_acc.sum();
    out.h_cc = h_acc.dot(coord_centered_);
    (*grad)[lay.gamma_gene_off + gene] += out.h_sum;
  }
}

double DartModel::eval(const Eigen::VectorXd& x, Eigen::VectorXd* grad, double* ll_out,
                       double* prior_out) const {
  const ParamLayout& lay = layout_;
  if (x.size() != lay.size)
    throw std::invalid_argument("DartModel: parameter vector size mismatch");
  const int N = lay.n_chems, M = lay.n_genes, D = lay.n_doses, K = lay.n_factors;
  const int P = lay.n_w, Q = lay.n_z;
  const bool want_grad = grad != nullptr;
  if (want_grad) {
    grad->resize(lay.size);
    grad->setZero();
  }

  // Likelihood: per-gene passes with a serial gene-order reduction so the
  // result does not depend on the thread count.
  double ll = 0.0;
  Eigen::RowVectorXd acol_sum = Eigen::RowVectorXd::Zero(K);
  double h_sum_total = 0.0, h_cc_total = 0.0;
  Eigen::MatrixXd deta_sum;
  if (want_grad) deta_sum.setZero(N, K);

  auto reduce = [&](const GenePartial& p) {
    ll += p.ll;
    if (want_grad) {
      deta_sum += p.deta;
      acol_sum += p.acol;
      h_sum_total += p.h_sum;
      h_cc_total += p.h_cc;
    }
  };

  const int workers = std::min(threads_, M);
  if (workers <= 1) {
    GenePartial part;
    for (int j = 0; j < M; ++j) {
      part.reset(N, K, want_grad);
      gene_pass(x, j, want_grad, grad, part);
      reduce(part);
    }
  } else {
    std::vector<GenePartial> parts(M);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int j = w; j < M; j += workers) {
          parts[j].reset(N, K, want_grad);
          gene_pass(x, j, want_grad, grad, parts[j]);
        }
      });
    }
    for (auto& t : pool) t.join();
    for (int j = 0; j < M; ++j) reduce(parts[j]);
  }

  ConstRowMap eta(x.data() + lay.eta_off, N, K);
  if (want_grad) {
    RowMap geta(grad->data() + lay.eta_off, N, K);
    geta += deta_sum;
    (*grad)[lay.log_tau0_off] += acol_sum.sum();
    // log gamma_k = -sum_{s<=k} log delta_s, so each factor contributes to
    // every earlier shrinkage increment.
    double suffix = 0.0;
    for (int k = K - 1; k >= 0; --k) {
      suffix += acol_sum[k];
      (*grad)[lay.log_delta_off + k] -= suffix;
    }
    (*grad)[lay.alpha_noise_off] += h_sum_total;
    (*grad)[lay.beta_noise_off] += h_cc_total;
  }

  // Priors.
  double lp = 0.0;
  ConstRowMap mu(x.data() + lay.mu_off, M, D);
  for (int j = 0; j < M; ++j) {
    const Eigen::VectorXd mj = mu.row(j).transpose();
    const Eigen::VectorXd q = kernel_inv_ * mj;
    lp += -0.5 * mj.dot(q) - kernel_.half_log_det - 0.5 * D * kLog2Pi;
    if (want_grad) {
      RowMap gmu(grad->data() + lay.mu_off, M, D);
      gmu.row(j) -= q.transpose();
    }
  }
  {
    const auto araw = x.segment(lay.lambda_raw_off, M * K * D);
    lp += -0.5 * araw.squaredNorm() - 0.5 * static_cast<double>(M * K * D) * kLog2Pi;
    if (want_grad) grad->segment(lay.lambda_raw_off, M * K * D) -= araw;
  }
  {
    const double sd_eta = (lay.kind == ModelKind::kDart && P > 0) ? 1.0 : hyper_.sigma_eta;
    const double inv_s2 = 1.0 / (sd_eta * sd_eta);
    const auto eta_flat = x.segment(lay.eta_off, N * K);
    lp += -0.5 * eta_flat.squaredNorm() * inv_s2 - N * K * std::log(sd_eta) -
          0.5 * static_cast<double>(N) * K * kLog2Pi;
    if (want_grad) grad->segment(lay.eta_off, N * K) -= inv_s2 * eta_flat;
  }
  if (P > 0) {
    ConstRowMap theta(x.data() + lay.theta_off, P, K);
    Eigen::Map<const Eigen::VectorXd> mu_c(x.data() + lay.mu_c_off, P);
    Eigen::MatrixXd resid = cov_.w;
    resid.noalias() -= eta * theta.transpose();
    resid.rowwise() -= mu_c.transpose();
    lp += -0.5 * resid.squaredNorm() - 0.5 * static_cast<double>(N) * P * kLog2Pi;
    const double st2 = hyper_.sigma_theta * hyper_.sigma_theta;
    const double sw2 = hyper_.sigma_w * hyper_.sigma_w;
    lp += -0.5 * theta.squaredNorm() / st2 - P * K * std::log(hyper_.sigma_theta) -
          0.5 * static_cast<double>(P) * K * kLog2Pi;
    lp += -0.5 * mu_c.squaredNorm() / sw2 - P * std::log(hyper_.sigma_w) -
          0.5 * P * kLog2Pi;
    if (want_grad) {
      RowMap geta(grad->data() + lay.eta_off, N, K);
      RowMap gtheta(grad->data() + lay.theta_off, P, K);
      Eigen::Map<Eigen::VectorXd> gmu_c(grad->data() + lay.mu_c_off, P);
      geta.noalias() += resid * theta;
      gtheta.noalias() += resid.transpose() * eta;
      gtheta -= theta / st2;
      gmu_c += resid.colwise().sum().transpose();
      gmu_c -= mu_c / sw2;
    }
  }
  if (lay.has_phi) {
    ConstRowMap lphi(x.data() + lay.log_phi_off, M, K);
    const double s2 = hyper_.sigma_phi * hyper_.sigma_phi;
    Eigen::MatrixXd center = Eigen::MatrixXd::Constant(M, K, -0.5 * s2);
    if (Q > 0) {
      ConstRowMap beta(x.data() + lay.beta_off, K, Q);
      center.noalias() += cov_.z * beta.transpose();
    }
    Eigen::MatrixXd u = lphi - center;
    lp += -0.5 * u.squaredNorm() / s2 - M * K * std::log(hyper_.sigma_phi) -
          0.5 * static_cast<double>(M) * K * kLog2Pi;
    if (want_grad) {
      RowMap glphi(grad->data() + lay.log_phi_off, M, K);
      glphi -= u / s2;
    }
    if (Q > 0) {
      ConstRowMap beta(x.data() + lay.beta_off, K, Q);
      const double sb2 = hyper_.sigma_beta * hyper_.sigma_beta;
      lp += -0.5 * beta.squaredNorm() / sb2 - K * Q * std::log(hyper_.sigma_beta) -
            0.5 * static_cast<double>(K) * Q * kLog2Pi;
      if (want_grad) {
        RowMap gbeta(grad->data() + lay.beta_off, K, Q);
        gbeta.noalias() += (u / s2).transpose() * cov_.z;
        gbeta -= beta / sb2;
      }
    }
  }
  for (int k = 0; k < K; ++k) {
    const double shape = k == 0 ? hyper_.mgp_a1 : hyper_.mgp_a2;
    const double rate = k == 0 ? hyper_.mgp_b1 : hyper_.mgp_b2;
    const double u = x[lay.log_delta_off + k];
    lp += log_gamma_on_log_scale(u, shape, rate);
    if (want_grad) (*grad)[lay.log_delta_off + k] += shape - rate * std::exp(u);
  }
  {
    const double u = x[lay.log_tau0_off];
    if (hyper_.tau0_prior == Tau0Prior::kGamma) {
      lp += log_gamma_on_log_scale(u, hyper_.tau0_a, hyper_.tau0_b);
      if (want_grad) (*grad)[lay.log_tau0_off] += hyper_.tau0_a - hyper_.tau0_b * std::exp(u);
    } else {
      lp += hyper_.tau0_a * std::log(hyper_.tau0_b) - std::lgamma(hyper_.tau0_a) -
            hyper_.tau0_a * u - hyper_.tau0_b * std::exp(-u);
      if (want_grad)
        (*grad)[lay.log_tau0_off] += -hyper_.tau0_a + hyper_.tau0_b * std::exp(-u);
    }
  }
  {
    const double za = (x[lay.alpha_noise_off] - hyper_.alpha_noise_mean) / hyper_.alpha_noise_sd;
    lp += -0.5 * za * za - std::log(hyper_.alpha_noise_sd) - 0.5 * kLog2Pi;
    const double zb = (x[lay.beta_noise_off] - hyper_.beta_noise_mean) / hyper_.beta_noise_sd;
    lp += -0.5 * zb * zb - std::log(hyper_.beta_noise_sd) - 0.5 * kLog2Pi;
    if (want_grad) {
      (*grad)[lay.alpha_noise_off] -= za / hyper_.alpha_noise_sd;
      (*grad)[lay.beta_noise_off] -= zb / hyper_.beta_noise_sd;
    }
  }
  {
    const double u = x[lay.log_tau_gamma_off];
    const double tau = std::exp(u);
    const double inv_t2 = 1.0 / (tau * tau);
    double gg_sq = 0.0;
    for (int j = 0; j < M; ++j) {
      const double g = x[lay.gamma_gene_off + j];
      gg_sq += g * g;
      if (want_grad) (*grad)[lay.gamma_gene_off + j] -= g * inv_t2;
    }
    lp += -0.5 * gg_sq * inv_t2 - M * u - 0.5 * M * kLog2Pi;
    const double hs = hyper_.tau_gamma_scale;
    lp += std::log(2.0) - 0.5 * kLog2Pi - std::log(hs) - 0.5 * tau * tau / (hs * hs) + u;
    if (want_grad)
      (*grad)[lay.log_tau_gamma_off] +=
          (gg_sq * inv_t2 - M) + (1.0 - tau * tau / (hs * hs));
  }

  if (ll_out) *ll_out = ll;
  if (prior_out) *prior_out = lp;
  return ll + lp;
}

double DartModel::log_density_gradient(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
  return eval(x, grad, nullptr, nullptr);
}

double DartModel::log_likelihood_at(const Eigen::VectorXd& x) const {
  double ll = 0.0;
  eval(x, nullptr, &ll, nullptr);
  return ll;
}

double DartModel::log_prior_at(const Eigen::VectorXd& x) const {
  double lp = 0.0;
  eval(x, nullptr, nullptr, &lp);
  return lp;
}

Eigen::VectorXd DartModel::pointwise_loglik(const Eigen::VectorXd& x) const {
  Eigen::VectorXd cell_mean, cell_var;
  predictive_params(x, &cell_mean, &cell_var);
  Eigen::VectorXd out(static_cast<Eigen::Index>(data_.cells.size()));
  for (std::size_t c = 0; c < data_.cells.size(); ++c) {
    const auto& cell = data_.cells[c];
    double sr2 = 0.0;
    for (double y : cell.responses) {
      const double r = y - cell_mean[c];
      sr2 += r * r;
    }
    out[c] = normal_logpdf_term(sr2, static_cast<int>(cell.responses.size()),
                                std::log(cell_var[c]));
  }
  return out;
}

void DartModel::predictive_params(const Eigen::VectorXd& x, Eigen::VectorXd* cell_mean,
                                  Eigen::VectorXd* cell_var) const {
  const ParamLayout& lay = layout_;
  if (x.size() != lay.size)
    throw std::invalid_argument("DartModel: parameter vector size mismatch");
  const int N = lay.n_chems, M = lay.n_genes, D = lay.n_doses, K = lay.n_factors;
  ConstRowMap mu(x.data() + lay.mu_off, M, D);
  ConstRowMap eta(x.data() + lay.eta_off, N, K);
  const double ltau0 = x[lay.log_tau0_off];
  const Eigen::Index n_cells = static_cast<Eigen::Index>(data_.cells.size());
  cell_mean->resize(n_cells);
  cell_var->resize(n_cells);
  for (int j = 0; j < M; ++j) {
    Eigen::VectorXd scale(K);
    double lg = 0.0;
    for (int k = 0; k < K; ++k) {
      lg -= x[lay.log_delta_off + k];
      const double lphi = lay.has_phi ? x[lay.log_phi_off + j * K + k] : 0.0;
      scale[k] = std::exp(0.5 * (ltau0 + lg + lphi));
    }
    Eigen::Map<const Eigen::MatrixXd> araw(x.data() + lay.lambda_raw_off + j * K * D, D, K);
    Eigen::MatrixXd lam = kernel_.chol * araw;
    for (int k = 0; k < K; ++k) lam.col(k) *= scale[k];
    const auto [lo, hi] = gene_ranges_[j];
    for (std::size_t c = lo; c < hi; ++c) {
      const auto& cell = data_.cells[c];
      (*cell_mean)[static_cast<Eigen::Index>(c)] =
          mu(j, cell.dose) + lam.row(cell.dose).dot(eta.row(cell.chem));
      (*cell_var)[static_cast<Eigen::Index>(c)] =
          std::exp(x[lay.alpha_noise_off] + x[lay.gamma_gene_off + j] +
                   x[lay.beta_noise_off] * coord_centered_[cell.dose]);
    }
  }
}

MeanEffect DartModel::mean_effect_at(const Eigen::VectorXd& x) const {
  return mean_effect(unpack_state(x, layout_), data_.grid, hyper_, options_.kernel_jitter);
}

}  // namespace dart
