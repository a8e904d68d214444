#include "dart/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dart/rng.hpp"
#include "dart/stats.hpp"

namespace dart {

DartFit fit_dart(const ObservationSet& data, const CovariateSet& covariates,
                 const FitOptions& options) {
  DartModel model(data, covariates, options.hyper, options.kind, options.n_factors,
                  options.model);
  model.set_threads(options.sampler.threads);
  DartFit fit;
  fit.layout = model.layout();
  fit.grid = model.data().grid;
  fit.draws = run_chains(model, options.sampler);
  return fit;
}

MeanEffect posterior_mean_effect(const DartModel& model, const PosteriorDraws& draws) {
  if (draws.size() == 0) throw std::invalid_argument("posterior_mean_effect: no draws");
  const ObservationSet& data = model.data();
  MeanEffect mean = MeanEffect::zeros(data.n_chems, data.n_genes, data.grid.size());
  for (const Eigen::VectorXd& x : draws.draws) {
    const MeanEffect s = model.mean_effect_at(x);
    for (int j = 0; j < mean.n_genes; ++j) mean.by_gene[j] += s.by_gene[j];
  }
  const double inv = 1.0 / static_cast<double>(draws.size());
  for (int j = 0; j < mean.n_genes; ++j) mean.by_gene[j] *= inv;
  return mean;
}

Eigen::MatrixXd pointwise_loglik_matrix(const DartModel& model, const PosteriorDraws& draws) {
  if (draws.size() == 0) throw std::invalid_argument("pointwise_loglik_matrix: no draws");
  const std::size_t n_cells = model.data().cells.size();
  Eigen::MatrixXd loglik(draws.size(), n_cells);
  for (std::size_t s = 0; s < draws.size(); ++s)
    loglik.row(s) = model.pointwise_loglik(draws.draws[s]).transpose();
  return loglik;
}

Eigen::MatrixXd predictive_replicate_means(const DartModel& model, const PosteriorDraws& draws,
                                           const std::vector<ObservationCell>& cells,
                                           std::uint64_t seed) {
  if (draws.size() == 0) throw std::invalid_argument("predictive_replicate_means: no draws");
  const DoseGrid& grid = model.data().grid;
  Eigen::MatrixXd out(draws.size(), cells.size());
  Rng rng(seed);
  for (std::size_t s = 0; s < draws.size(); ++s) {
    const LatentState state = unpack_state(draws.draws[s], model.layout());
    const MeanEffect effect = model.mean_effect_at(draws.draws[s]);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const ObservationCell& cell = cells[c];
      const double var =
          noise_variance(state.alpha_noise, state.gamma_gene[cell.gene], state.beta_noise,
                         grid.coords[cell.dose], model.dose_coord_mean());
      const double n_rep = static_cast<double>(std::max<std::size_t>(cell.responses.size(), 1));
      out(s, c) = rng.normal(effect(cell.chem, cell.gene, cell.dose), std::sqrt(var / n_rep));
    }
  }
  return out;
}

Eigen::VectorXd effect_at_cells(const MeanEffect& effect,
                                const std::vector<ObservationCell>& cells) {
  Eigen::VectorXd out(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c)
    out[c] = effect(cells[c].chem, cells[c].gene, cells[c].dose);
  return out;
}

Eigen::VectorXd replicate_means(const std::vector<ObservationCell>& cells) {
  Eigen::VectorXd out(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) out[c] = stats::mean(cells[c].responses);
  return out;
}

double effect_correlation(const MeanEffect& effect, const std::vector<ObservationCell>& cells) {
  if (cells.size() < 2) throw std::invalid_argument("effect_correlation: too few cells");
  const Eigen::VectorXd a = effect_at_cells(effect, cells);
  const Eigen::VectorXd b = replicate_means(cells);
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  return denom > 0.0 ? da.dot(db) / denom : std::numeric_limits<double>::quiet_NaN();
}

std::vector<std::vector<double>> per_chain_series(const PosteriorDraws& draws,
                                                  const std::vector<double>& values) {
  if (values.size() != draws.size())
    throw std::invalid_argument("per_chain_series: size mismatch");
  int n_chains = 0;
  for (int c : draws.chain) n_chains = std::max(n_chains, c + 1);
  std::vector<std::vector<double>> series(n_chains);
  for (std::size_t s = 0; s < values.size(); ++s) series[draws.chain[s]].push_back(values[s]);
  return series;
}

MetricReport evaluate_fit(const DartModel& model, const PosteriorDraws& draws,
                          const ObservationSet* heldout, std::uint64_t predictive_seed) {
  if (draws.size() == 0) throw std::invalid_argument("evaluate_fit: no draws");
  MetricReport report;

  const Eigen::MatrixXd loglik = pointwise_loglik_matrix(model, draws);
  const WaicResult w = waic(loglik);
  report.waic = w.waic;
  report.waic_se = w.se;
  report.p_waic = w.p_eff;
  const PsisLooResult loo = psis_loo(loglik);
  report.loo_elpd = loo.elpd;
  report.loo_se = loo.se;
  report.loo_high_k = loo.n_high_k;

  const MeanEffect mean_s = posterior_mean_effect(model, draws);
  {
    const auto [rmse, r2] = rmse_r2(effect_at_cells(mean_s, model.data().cells),
                                    replicate_means(model.data().cells));
    report.in_rmse = rmse;
    report.in_r2 = r2;
  }
  const bool have_out = heldout && !heldout->cells.empty();
  if (have_out) {
    const auto [rmse, r2] =
        rmse_r2(effect_at_cells(mean_s, heldout->cells), replicate_means(heldout->cells));
    report.out_rmse = rmse;
    report.out_r2 = r2;
  } else {
    report.out_rmse = std::numeric_limits<double>::quiet_NaN();
    report.out_r2 = std::numeric_limits<double>::quiet_NaN();
  }

  // Predictive checks target the held-out replicate means when there are
  // any, the training cells otherwise.
  const std::vector<ObservationCell>& target = have_out ? heldout->cells : model.data().cells;
  const Eigen::MatrixXd pred = predictive_replicate_means(model, draws, target, predictive_seed);
  const Eigen::VectorXd observed = replicate_means(target);
  Eigen::VectorXd lower(target.size()), upper(target.size());
  double crps_sum = 0.0;
  for (std::size_t c = 0; c < target.size(); ++c) {
    std::vector<double> column(pred.rows());
    for (Eigen::Index s = 0; s < pred.rows(); ++s) column[s] = pred(s, c);
    crps_sum += crps(column, observed[c]);
    lower[c] = stats::quantile(column, 0.05);
    upper[c] = stats::quantile(column, 0.95);
  }
  report.mean_crps = crps_sum / static_cast<double>(target.size());
  report.coverage = coverage_by_quintile(lower, upper, observed);

  report.lp_rhat = split_rhat(per_chain_series(draws, draws.log_post));
  report.lp_ess_bulk = ess_bulk(per_chain_series(draws, draws.log_post));
  report.lp_ess_tail = ess_tail(per_chain_series(draws, draws.log_post));
  double max_rhat = -std::numeric_limits<double>::infinity();
  std::vector<double> values(draws.size());
  for (int d = 0; d < draws.dim; ++d) {
    for (std::size_t s = 0; s < draws.size(); ++s) values[s] = draws.draws[s][d];
    const double r = split_rhat(per_chain_series(draws, values));
    if (std::isfinite(r)) max_rhat = std::max(max_rhat, r);
  }
  report.max_param_rhat = std::isfinite(max_rhat) ? max_rhat
                                                  : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace dart
