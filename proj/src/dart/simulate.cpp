#include "dart/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "dart/csv.hpp"
#include "dart/ingest.hpp"
#include "dart/kernel.hpp"
#include "dart/model.hpp"
#include "dart/rng.hpp"

namespace dart {

namespace {

std::vector<std::string> make_ids(const std::string& prefix, int n) {
  int width = 1;
  for (int v = n; v >= 10; v /= 10) ++width;
  std::vector<std::string> ids;
  ids.reserve(n);
  for (int i = 1; i <= n; ++i) {
    std::string num = std::to_string(i);
    ids.push_back(prefix + std::string(width - num.size(), '0') + num);
  }
  return ids;
}

void validate_sim_config(const SimulationConfig& c) {
  if (c.n_chems < 1 || c.n_genes < 1 || c.n_doses < 1 || c.n_factors < 1)
    throw std::invalid_argument("simulate: dimensions must be positive");
  if (c.replicates < 1) throw std::invalid_argument("simulate: replicates must be >= 1");
  if (c.n_w < 0 || c.n_z < 0) throw std::invalid_argument("simulate: covariate widths must be >= 0");
  if (!(c.pi_miss >= 0.0 && c.pi_miss < 1.0))
    throw std::invalid_argument("simulate: pi_miss must be in [0, 1)");
  if (!(c.z_prevalence >= 0.0 && c.z_prevalence <= 1.0))
    throw std::invalid_argument("simulate: z_prevalence must be in [0, 1]");
  if (c.kind == ModelKind::kDartNc && (c.n_w > 0 || c.n_z > 0))
    throw std::invalid_argument("simulate: the no-covariate model cannot take covariates");
  c.hyper.validate();
}

double draw_gamma_or_inverse(Rng& rng, const Hyperparameters& h) {
  const double g = rng.gamma(h.tau0_a, h.tau0_b);
  return h.tau0_prior == Tau0Prior::kGamma ? g : 1.0 / g;
}

}  // namespace

SyntheticDataset simulate_dataset(const SimulationConfig& config) {
  validate_sim_config(config);
  const int N = config.n_chems, M = config.n_genes, D = config.n_doses;
  const int K = config.n_factors, R = config.replicates;
  // Without covariates the generator is exactly the no-covariate prior stack.
  const ModelKind kind =
      (config.n_w == 0 && config.n_z == 0) ? ModelKind::kDartNc : config.kind;
  const int P = kind == ModelKind::kDart ? config.n_w : 0;
  const int Q = kind == ModelKind::kDart ? config.n_z : 0;
  const Hyperparameters& h = config.hyper;

  SyntheticDataset out;
  out.config = config;
  out.config.kind = kind;
  out.true_layout = make_layout(kind, N, M, D, K, P, Q);
  const DoseGrid grid = simulation_dose_grid(D);
  const KernelCholesky kern = kernel_matrix(grid, h.length_scale);

  Rng structure(split_seed(config.seed, 1));
  Rng noise(split_seed(config.seed, 2));

  // Gene annotations precede the latent draws; every block is drawn in a
  // fixed documented order so absent blocks do not shift the others.
  CovariateSet cov;
  if (Q > 0) {
    cov.z.resize(M, Q);
    for (int j = 0; j < M; ++j)
      for (int q = 0; q < Q; ++q) cov.z(j, q) = structure.bernoulli(config.z_prevalence) ? 1.0 : 0.0;
    cov.z_names.reserve(Q);
    for (int q = 0; q < Q; ++q) cov.z_names.push_back("z" + std::to_string(q + 1));
  }

  LatentState s;
  s.log_delta.resize(K);
  for (int k = 0; k < K; ++k)
    s.log_delta[k] = std::log(k == 0 ? structure.gamma(h.mgp_a1, h.mgp_b1)
                                     : structure.gamma(h.mgp_a2, h.mgp_b2));
  s.log_tau0 = std::log(draw_gamma_or_inverse(structure, h));
  if (out.true_layout.has_phi) {
    if (Q > 0) {
      s.beta.resize(K, Q);
      for (int k = 0; k < K; ++k)
        for (int q = 0; q < Q; ++q) s.beta(k, q) = structure.normal(0.0, h.sigma_beta);
    }
    s.log_phi.resize(M, K);
    const double half_var = 0.5 * h.sigma_phi * h.sigma_phi;
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < K; ++k) {
        const double center = (Q > 0 ? cov.z.row(j).dot(s.beta.row(k)) : 0.0) - half_var;
        s.log_phi(j, k) = structure.normal(center, h.sigma_phi);
      }
  }
  s.lambda_raw.assign(M, Eigen::MatrixXd(D, K));
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < K; ++k)
      for (int d = 0; d < D; ++d) s.lambda_raw[j](d, k) = structure.normal();
  s.mu.resize(M, D);
  for (int j = 0; j < M; ++j) {
    Eigen::VectorXd z(D);
    for (int d = 0; d < D; ++d) z[d] = structure.normal();
    s.mu.row(j) = (kern.chol * z).transpose();
  }
  const double sd_eta = (kind == ModelKind::kDart && P > 0) ? 1.0 : h.sigma_eta;
  s.eta.resize(N, K);
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k) s.eta(i, k) = structure.normal(0.0, sd_eta);
  if (P > 0) {
    s.theta.resize(P, K);
    for (int p = 0; p < P; ++p)
      for (int k = 0; k < K; ++k) s.theta(p, k) = structure.normal(0.0, h.sigma_theta);
    s.mu_c.resize(P);
    for (int p = 0; p < P; ++p) s.mu_c[p] = structure.normal(0.0, h.sigma_w);
    cov.w.resize(N, P);
    for (int i = 0; i < N; ++i)
      for (int p = 0; p < P; ++p)
        cov.w(i, p) = s.mu_c[p] + s.theta.row(p).dot(s.eta.row(i)) + structure.normal();
    cov.w_names.reserve(P);
    for (int p = 0; p < P; ++p) cov.w_names.push_back("w" + std::to_string(p + 1));
  }
  s.alpha_noise = structure.normal(h.alpha_noise_mean, h.alpha_noise_sd);
  s.beta_noise = structure.normal(h.beta_noise_mean, h.beta_noise_sd);
  const double tau_gamma = std::abs(structure.normal(0.0, h.tau_gamma_scale));
  s.log_tau_gamma = std::log(tau_gamma);
  s.gamma_gene.resize(M);
  for (int j = 0; j < M; ++j) s.gamma_gene[j] = structure.normal(0.0, tau_gamma);

  out.true_state = s;
  out.truth = mean_effect(s, grid, h);

  double coord_mean = 0.0;
  for (double c : grid.coords) coord_mean += c;
  coord_mean /= D;

  ObservationSet data;
  data.n_chems = N;
  data.n_genes = M;
  data.grid = grid;
  data.chem_ids = make_ids("chem_", N);
  data.gene_ids = make_ids("gene_", M);
  data.cells.reserve(static_cast<std::size_t>(N) * M * D);
  for (int j = 0; j < M; ++j) {
    for (int i = 0; i < N; ++i) {
      for (int d = 0; d < D; ++d) {
        const double sd = std::sqrt(noise_variance(s.alpha_noise, s.gamma_gene[j],
                                                   s.beta_noise, grid.coords[d], coord_mean));
        ObservationCell cell{i, j, d, {}};
        cell.responses.reserve(R);
        for (int r = 0; r < R; ++r)
          cell.responses.push_back(out.truth(i, j, d) + sd * noise.normal());
        data.cells.push_back(std::move(cell));
      }
    }
  }
  data.finalize();
  out.data = std::move(data);
  out.heldout = out.data;
  out.heldout.cells.clear();
  out.covariates = std::move(cov);

  if (config.pi_miss > 0.0)
    out = mask_triples(out, config.pi_miss, split_seed(config.seed, 3));
  return out;
}

std::pair<ObservationSet, ObservationSet> split_cells(
    const ObservationSet& data, const std::vector<std::size_t>& cell_idx) {
  std::vector<bool> remove(data.cells.size(), false);
  for (std::size_t idx : cell_idx) {
    if (idx >= data.cells.size()) throw std::invalid_argument("split_cells: index out of range");
    remove[idx] = true;
  }
  ObservationSet retained = data, heldout = data;
  retained.cells.clear();
  heldout.cells.clear();
  for (std::size_t c = 0; c < data.cells.size(); ++c)
    (remove[c] ? heldout : retained).cells.push_back(data.cells[c]);
  return {std::move(retained), std::move(heldout)};
}

SyntheticDataset mask_triples(const SyntheticDataset& dataset, double pi_miss,
                              std::uint64_t seed) {
  if (!(pi_miss >= 0.0 && pi_miss < 1.0))
    throw std::invalid_argument("mask_triples: pi_miss must be in [0, 1)");
  const std::size_t n_cells = dataset.data.cells.size();
  const auto n_mask = static_cast<std::size_t>(std::llround(pi_miss * static_cast<double>(n_cells)));
  if (n_mask == 0) return dataset;

  // Partial Fisher-Yates over the observed cells.
  std::vector<std::size_t> idx(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) idx[c] = c;
  Rng rng(seed);
  for (std::size_t t = 0; t < n_mask; ++t) {
    const std::size_t swap_with = t + static_cast<std::size_t>(rng.integer(n_cells - t));
    std::swap(idx[t], idx[swap_with]);
  }
  idx.resize(n_mask);

  SyntheticDataset out = dataset;
  auto [retained, heldout] = split_cells(dataset.data, idx);
  out.data = std::move(retained);
  for (const auto& cell : heldout.cells) {
    out.heldout.cells.push_back(cell);
    out.mask.push_back({cell.chem, cell.gene, cell.dose});
  }
  out.heldout.finalize();
  std::sort(out.mask.begin(), out.mask.end());
  return out;
}

std::vector<std::pair<ObservationSet, ObservationSet>> split_pairs(
    const ObservationSet& data, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("split_pairs: need at least two folds");
  std::set<std::pair<int, int>> pair_set;
  for (const auto& c : data.cells) pair_set.insert({c.chem, c.gene});
  std::vector<std::pair<int, int>> pairs(pair_set.begin(), pair_set.end());
  if (static_cast<int>(pairs.size()) < k)
    throw std::invalid_argument("split_pairs: fewer observed pairs than folds");

  Rng rng(seed);
  for (std::size_t t = 0; t + 1 < pairs.size(); ++t) {
    const std::size_t swap_with = t + static_cast<std::size_t>(rng.integer(pairs.size() - t));
    std::swap(pairs[t], pairs[swap_with]);
  }
  // Contiguous blocks whose sizes differ by at most one.
  const std::size_t base = pairs.size() / k, rem = pairs.size() % k;
  std::vector<std::pair<ObservationSet, ObservationSet>> folds;
  folds.reserve(k);
  std::size_t start = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < rem ? 1 : 0);
    std::set<std::pair<int, int>> fold_pairs(pairs.begin() + start, pairs.begin() + start + size);
    start += size;
    std::vector<std::size_t> idx;
    for (std::size_t c = 0; c < data.cells.size(); ++c)
      if (fold_pairs.count({data.cells[c].chem, data.cells[c].gene})) idx.push_back(c);
    folds.push_back(split_cells(data, idx));
  }
  return folds;
}

std::vector<SyntheticDataset> mask_pairs(const SyntheticDataset& dataset, int k,
                                         std::uint64_t seed) {
  auto splits = split_pairs(dataset.data, k, seed);
  std::vector<SyntheticDataset> folds;
  folds.reserve(splits.size());
  for (auto& [retained, heldout] : splits) {
    SyntheticDataset fold = dataset;
    fold.data = std::move(retained);
    for (const auto& cell : heldout.cells) {
      fold.heldout.cells.push_back(cell);
      fold.mask.push_back({cell.chem, cell.gene, cell.dose});
    }
    fold.heldout.finalize();
    std::sort(fold.mask.begin(), fold.mask.end());
    folds.push_back(std::move(fold));
  }
  return folds;
}

std::pair<ObservationSet, ObservationSet> split_dose_fold(const ObservationSet& data,
                                                          int fold) {
  if (fold < 1) throw std::invalid_argument("split_dose_fold: fold is 1-based");
  // Cells are sorted (gene, chem, dose), so each pair's doses appear in
  // ascending order; collect per-pair cell positions.
  std::map<std::pair<int, int>, std::vector<std::size_t>> by_pair;
  for (std::size_t c = 0; c < data.cells.size(); ++c)
    by_pair[{data.cells[c].chem, data.cells[c].gene}].push_back(c);
  std::vector<std::size_t> idx;
  for (const auto& [pair, cells] : by_pair) {
    if (cells.size() >= 5 && static_cast<std::size_t>(fold) <= cells.size())
      idx.push_back(cells[fold - 1]);
  }
  return split_cells(data, idx);
}

SyntheticDataset mask_dose_fold(const SyntheticDataset& dataset, int fold) {
  auto [retained, heldout] = split_dose_fold(dataset.data, fold);
  SyntheticDataset out = dataset;
  out.data = std::move(retained);
  for (const auto& cell : heldout.cells) {
    out.heldout.cells.push_back(cell);
    out.mask.push_back({cell.chem, cell.gene, cell.dose});
  }
  out.heldout.finalize();
  std::sort(out.mask.begin(), out.mask.end());
  return out;
}

namespace {

const char* kind_name(ModelKind k) {
  return k == ModelKind::kDart ? "dart" : "dart-nc";
}

ModelKind kind_from_name(const std::string& s) {
  if (s == "dart") return ModelKind::kDart;
  if (s == "dart-nc") return ModelKind::kDartNc;
  throw std::runtime_error("unknown model kind: " + s);
}

void write_state_csv(const LatentState& s, const ParamLayout& lay, const std::string& path) {
  auto f = csv::open_out(path);
  f << "block,i1,i2,i3,value\n";
  auto row = [&f](const char* block, int a, int b, int c, double v) {
    f << block << ',' << a << ',' << b << ',' << c << ',' << csv::format(v) << '\n';
  };
  for (int j = 0; j < lay.n_genes; ++j)
    for (int d = 0; d < lay.n_doses; ++d) row("mu", j, d, 0, s.mu(j, d));
  for (int j = 0; j < lay.n_genes; ++j)
    for (int k = 0; k < lay.n_factors; ++k)
      for (int d = 0; d < lay.n_doses; ++d)
        row("lambda_raw", j, k, d, s.lambda_raw[j](d, k));
  for (int i = 0; i < lay.n_chems; ++i)
    for (int k = 0; k < lay.n_factors; ++k) row("eta", i, k, 0, s.eta(i, k));
  for (int k = 0; k < lay.n_factors; ++k) row("log_delta", k, 0, 0, s.log_delta[k]);
  row("log_tau0", 0, 0, 0, s.log_tau0);
  if (lay.has_phi) {
    for (int j = 0; j < lay.n_genes; ++j)
      for (int k = 0; k < lay.n_factors; ++k) row("log_phi", j, k, 0, s.log_phi(j, k));
    for (int k = 0; k < lay.n_factors; ++k)
      for (int q = 0; q < lay.n_z; ++q) row("beta", k, q, 0, s.beta(k, q));
  }
  for (int p = 0; p < lay.n_w; ++p)
    for (int k = 0; k < lay.n_factors; ++k) row("theta", p, k, 0, s.theta(p, k));
  for (int p = 0; p < lay.n_w; ++p) row("mu_c", p, 0, 0, s.mu_c[p]);
  row("alpha_noise", 0, 0, 0, s.alpha_noise);
  row("beta_noise", 0, 0, 0, s.beta_noise);
  for (int j = 0; j < lay.n_genes; ++j) row("gamma_gene", j, 0, 0, s.gamma_gene[j]);
  row("log_tau_gamma", 0, 0, 0, s.log_tau_gamma);
}

LatentState read_state_csv(const ParamLayout& lay, const std::string& path) {
  LatentState s;
  s.mu.setZero(lay.n_genes, lay.n_doses);
  s.lambda_raw.assign(lay.n_genes, Eigen::MatrixXd::Zero(lay.n_doses, lay.n_factors));
  s.eta.setZero(lay.n_chems, lay.n_factors);
  s.log_delta.setZero(lay.n_factors);
  if (lay.has_phi) {
    s.log_phi.setZero(lay.n_genes, lay.n_factors);
    if (lay.n_z > 0) s.beta.setZero(lay.n_factors, lay.n_z);
  }
  if (lay.n_w > 0) {
    s.theta.setZero(lay.n_w, lay.n_factors);
    s.mu_c.setZero(lay.n_w);
  }
  s.gamma_gene.setZero(lay.n_genes);

  auto f = csv::open_in(path);
  std::string line;
  std::getline(f, line);  // header
  long line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto p = csv::split(line);
    if (p.size() != 5)
      throw std::runtime_error("state csv: wrong field count at line " + std::to_string(line_no));
    const std::string& block = p[0];
    const int a = static_cast<int>(csv::parse_long(p[1], "state index"));
    const int b = static_cast<int>(csv::parse_long(p[2], "state index"));
    const int c = static_cast<int>(csv::parse_long(p[3], "state index"));
    const double v = csv::parse_double(p[4], "state value");
    if (block == "mu") s.mu(a, b) = v;
    else if (block == "lambda_raw") s.lambda_raw[a](c, b) = v;
    else if (block == "eta") s.eta(a, b) = v;
    else if (block == "log_delta") s.log_delta[a] = v;
    else if (block == "log_tau0") s.log_tau0 = v;
    else if (block == "log_phi") s.log_phi(a, b) = v;
    else if (block == "beta") s.beta(a, b) = v;
    else if (block == "theta") s.theta(a, b) = v;
    else if (block == "mu_c") s.mu_c[a] = v;
    else if (block == "alpha_noise") s.alpha_noise = v;
    else if (block == "beta_noise") s.beta_noise = v;
    else if (block == "gamma_gene") s.gamma_gene[a] = v;
    else if (block == "log_tau_gamma") s.log_tau_gamma = v;
    else throw std::runtime_error("state csv: unknown block '" + block + "'");
  }
  return s;
}

}  // namespace

void write_dataset(const SyntheticDataset& dataset, const std::string& dir) {
  const BinTable bins = BinTable::standard();
  const std::string base = dir.empty() ? "." : dir;
  {
    auto f = csv::open_out(base + "/meta.csv");
    f << "key,value\n";
    const SimulationConfig& c = dataset.config;
    f << "n_chems," << c.n_chems << "\n";
    f << "n_genes," << c.n_genes << "\n";
    f << "n_doses," << c.n_doses << "\n";
    f << "n_factors," << c.n_factors << "\n";
    f << "replicates," << c.replicates << "\n";
    f << "n_w," << c.n_w << "\n";
    f << "n_z," << c.n_z << "\n";
    f << "pi_miss," << csv::format(c.pi_miss) << "\n";
    f << "z_prevalence," << csv::format(c.z_prevalence) << "\n";
    f << "seed," << c.seed << "\n";
    f << "kind," << kind_name(c.kind) << "\n";
    const Hyperparameters& h = c.hyper;
    f << "hyper_length_scale," << csv::format(h.length_scale) << "\n";
    f << "hyper_mgp_a1," << csv::format(h.mgp_a1) << "\n";
    f << "hyper_mgp_b1," << csv::format(h.mgp_b1) << "\n";
    f << "hyper_mgp_a2," << csv::format(h.mgp_a2) << "\n";
    f << "hyper_mgp_b2," << csv::format(h.mgp_b2) << "\n";
    f << "hyper_tau0_prior,"
      << (h.tau0_prior == Tau0Prior::kGamma ? "gamma" : "inverse_gamma") << "\n";
    f << "hyper_tau0_a," << csv::format(h.tau0_a) << "\n";
    f << "hyper_tau0_b," << csv::format(h.tau0_b) << "\n";
    f << "hyper_sigma_phi," << csv::format(h.sigma_phi) << "\n";
    f << "hyper_sigma_beta," << csv::format(h.sigma_beta) << "\n";
    f << "hyper_sigma_eta," << csv::format(h.sigma_eta) << "\n";
    f << "hyper_sigma_w," << csv::format(h.sigma_w) << "\n";
    f << "hyper_sigma_theta," << csv::format(h.sigma_theta) << "\n";
    f << "hyper_alpha_noise_mean," << csv::format(h.alpha_noise_mean) << "\n";
    f << "hyper_alpha_noise_sd," << csv::format(h.alpha_noise_sd) << "\n";
    f << "hyper_beta_noise_mean," << csv::format(h.beta_noise_mean) << "\n";
    f << "hyper_beta_noise_sd," << csv::format(h.beta_noise_sd) << "\n";
    f << "hyper_tau_gamma_scale," << csv::format(h.tau_gamma_scale) << "\n";
  }
  write_observation_csv(dataset.data, bins, base + "/observations.csv");
  write_observation_csv(dataset.heldout, bins, base + "/heldout.csv");
  if (dataset.covariates.w.cols() > 0)
    write_covariates_w_csv(dataset.covariates, dataset.data.chem_ids, base + "/covariates_w.csv");
  if (dataset.covariates.z.cols() > 0)
    write_covariates_z_csv(dataset.covariates, dataset.data.gene_ids, base + "/covariates_z.csv");
  {
    auto f = csv::open_out(base + "/truth.csv");
    f << "chem,gene,dose,value\n";
    for (int j = 0; j < dataset.truth.n_genes; ++j)
      for (int i = 0; i < dataset.truth.n_chems; ++i)
        for (int d = 0; d < dataset.truth.n_doses; ++d)
          f << i << ',' << j << ',' << d << ',' << csv::format(dataset.truth(i, j, d)) << '\n';
  }
  write_state_csv(dataset.true_state, dataset.true_layout, base + "/state.csv");
  {
    auto f = csv::open_out(base + "/mask.csv");
    f << "chem,gene,dose\n";
    for (const auto& t : dataset.mask) f << t[0] << ',' << t[1] << ',' << t[2] << '\n';
  }
}

namespace {

ObservationSet assemble_rows(const std::vector<ObservationRecord>& rows,
                             const std::vector<std::string>& chem_ids,
                             const std::vector<std::string>& gene_ids,
                             const DoseGrid& grid, const BinTable& bins) {
  std::map<std::string, int> chem_index, gene_index;
  for (std::size_t i = 0; i < chem_ids.size(); ++i) chem_index[chem_ids[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < gene_ids.size(); ++j) gene_index[gene_ids[j]] = static_cast<int>(j);
  std::map<double, int> dose_index;
  for (int d = 0; d < grid.size(); ++d) dose_index[grid.coords[d]] = d;

  struct Key {
    int chem, gene, dose, replicate;
    double response;
  };
  std::vector<Key> keys;
  keys.reserve(rows.size());
  for (const auto& r : rows) {
    auto ci = chem_index.find(r.chem_id);
    auto gi = gene_index.find(r.gene_id);
    if (ci == chem_index.end() || gi == gene_index.end())
      throw std::runtime_error("dataset csv: unknown id '" + r.chem_id + "'/'" + r.gene_id + "'");
    const auto label = bins.discretize(r.dose_um);
    if (!label) throw std::runtime_error("dataset csv: dose outside bin table");
    auto di = dose_index.find(*label);
    if (di == dose_index.end()) throw std::runtime_error("dataset csv: dose not on the grid");
    keys.push_back({ci->second, gi->second, di->second, r.replicate, r.response});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return std::tie(a.gene, a.chem, a.dose, a.replicate) <
           std::tie(b.gene, b.chem, b.dose, b.replicate);
  });
  ObservationSet out;
  out.n_chems = static_cast<int>(chem_ids.size());
  out.n_genes = static_cast<int>(gene_ids.size());
  out.grid = grid;
  out.chem_ids = chem_ids;
  out.gene_ids = gene_ids;
  for (const auto& k : keys) {
    if (out.cells.empty() || out.cells.back().chem != k.chem ||
        out.cells.back().gene != k.gene || out.cells.back().dose != k.dose)
      out.cells.push_back(ObservationCell{k.chem, k.gene, k.dose, {}});
    out.cells.back().responses.push_back(k.response);
  }
  out.finalize();
  return out;
}

}  // namespace

SyntheticDataset load_dataset(const std::string& dir) {
  const std::string base = dir.empty() ? "." : dir;
  std::map<std::string, std::string> meta;
  {
    auto f = csv::open_in(base + "/meta.csv");
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      const auto p = csv::split(line);
      if (p.size() != 2) throw std::runtime_error("meta.csv: malformed line");
      meta[p[0]] = p[1];
    }
  }
  auto geti = [&meta](const char* k) {
    return static_cast<int>(csv::parse_long(meta.at(k), k));
  };
  auto getd = [&meta](const char* k) { return csv::parse_double(meta.at(k), k); };

  SimulationConfig c;
  c.n_chems = geti("n_chems");
  c.n_genes = geti("n_genes");
  c.n_doses = geti("n_doses");
  c.n_factors = geti("n_factors");
  c.replicates = geti("replicates");
  c.n_w = geti("n_w");
  c.n_z = geti("n_z");
  c.pi_miss = getd("pi_miss");
  c.z_prevalence = getd("z_prevalence");
  c.seed = static_cast<std::uint64_t>(csv::parse_long(meta.at("seed"), "seed"));
  c.kind = kind_from_name(meta.at("kind"));
  Hyperparameters& h = c.hyper;
  h.length_scale = getd("hyper_length_scale");
  h.mgp_a1 = getd("hyper_mgp_a1");
  h.mgp_b1 = getd("hyper_mgp_b1");
  h.mgp_a2 = getd("hyper_mgp_a2");
  h.mgp_b2 = getd("hyper_mgp_b2");
  h.tau0_prior = meta.at("hyper_tau0_prior") == "gamma" ? Tau0Prior::kGamma
                                                        : Tau0Prior::kInverseGamma;
  h.tau0_a = getd("hyper_tau0_a");
  h.tau0_b = getd("hyper_tau0_b");
  h.sigma_phi = getd("hyper_sigma_phi");
  h.sigma_beta = getd("hyper_sigma_beta");
  h.sigma_eta = getd("hyper_sigma_eta");
  h.sigma_w = getd("hyper_sigma_w");
  h.sigma_theta = getd("hyper_sigma_theta");
  h.alpha_noise_mean = getd("hyper_alpha_noise_mean");
  h.alpha_noise_sd = getd("hyper_alpha_noise_sd");
  h.beta_noise_mean = getd("hyper_beta_noise_mean");
  h.beta_noise_sd = getd("hyper_beta_noise_sd");
  h.tau_gamma_scale = getd("hyper_tau_gamma_scale");

  SyntheticDataset out;
  out.config = c;
  const int P = c.kind == ModelKind::kDart ? c.n_w : 0;
  const int Q = c.kind == ModelKind::kDart ? c.n_z : 0;
  out.true_layout = make_layout(c.kind, c.n_chems, c.n_genes, c.n_doses, c.n_factors, P, Q);
  const DoseGrid grid = simulation_dose_grid(c.n_doses);
  const BinTable bins = BinTable::standard();
  const auto chem_ids = make_ids("chem_", c.n_chems);
  const auto gene_ids = make_ids("gene_", c.n_genes);

  out.data = assemble_rows(read_observation_csv(base + "/observations.csv"), chem_ids,
                           gene_ids, grid, bins);
  out.heldout = assemble_rows(read_observation_csv(base + "/heldout.csv"), chem_ids,
                              gene_ids, grid, bins);
  if (c.n_w > 0) {
    auto res = load_and_validate({base + "/observations.csv", base + "/covariates_w.csv",
                                  Q > 0 ? base + "/covariates_z.csv" : ""});
    out.covariates = std::move(res.covariates);
  } else if (Q > 0) {
    auto res = load_and_validate({base + "/observations.csv", "", base + "/covariates_z.csv"});
    out.covariates = std::move(res.covariates);
  }
  out.truth = MeanEffect::zeros(c.n_chems, c.n_genes, c.n_doses);
  {
    auto f = csv::open_in(base + "/truth.csv");
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      const auto p = csv::split(line);
      if (p.size() != 4) throw std::runtime_error("truth.csv: malformed line");
      out.truth(static_cast<int>(csv::parse_long(p[0], "chem")),
                static_cast<int>(csv::parse_long(p[1], "gene")),
                static_cast<int>(csv::parse_long(p[2], "dose"))) =
          csv::parse_double(p[3], "truth value");
    }
  }
  out.true_state = read_state_csv(out.true_layout, base + "/state.csv");
  {
    auto f = csv::open_in(base + "/mask.csv");
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      const auto p = csv::split(line);
      if (p.size() != 3) throw std::runtime_error("mask.csv: malformed line");
      out.mask.push_back({static_cast<int>(csv::parse_long(p[0], "chem")),
                          static_cast<int>(csv::parse_long(p[1], "gene")),
                          static_cast<int>(csv::parse_long(p[2], "dose"))});
    }
  }
  return out;
}

}  // namespace dart
