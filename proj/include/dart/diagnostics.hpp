#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace dart {

// Rank-normalized split R-hat (NaN for constant input or fewer than four
// draws per chain).
double split_rhat(const std::vector<std::vector<double>>& chains);

// Effective sample sizes via the initial-positive-sequence estimator on
// split chains; bulk uses rank-normalized draws, tail is the smaller ESS of
// the 5% and 95% exceedance indicators.
double ess_bulk(const std::vector<std::vector<double>>& chains);
double ess_tail(const std::vector<std::vector<double>>& chains);

struct WaicResult {
  double elpd = 0.0;
  double p_eff = 0.0;
  double waic = 0.0;  // -2 * elpd
  double se = 0.0;
  Eigen::VectorXd pointwise_elpd;
};
// loglik: draws x cells, each entry the per-cell log likelihood of one draw.
WaicResult waic(const Eigen::MatrixXd& loglik);

struct PsisLooResult {
  double elpd = 0.0;
  double se = 0.0;
  Eigen::VectorXd pointwise_elpd;
  Eigen::VectorXd pareto_k;  // -inf when the ratios were constant
  int n_high_k = 0;          // cells with k > 0.7
};
PsisLooResult psis_loo(const Eigen::MatrixXd& loglik);

// Continuous ranked probability score of an empirical predictive sample:
// mean |X - y| - 0.5 mean |X - X'| with the pair mean over all ordered pairs
// (self-pairs included).
double crps(const std::vector<double>& samples, double y);

struct CoverageBin {
  double abs_mean_lo = 0.0;
  double abs_mean_hi = 0.0;
  long n = 0;
  long covered = 0;
  double rate() const { return n > 0 ? static_cast<double>(covered) / n : 0.0; }
};
struct CoverageResult {
  long n = 0;
  long covered = 0;
  double overall = 0.0;
  std::vector<CoverageBin> bins;  // quintiles of |observed|, ascending
};
// Interval coverage binned by quintiles of |observed| (contiguous groups of
// the sorted order, so the bins partition the cells exactly).
CoverageResult coverage_by_quintile(const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper,
                                    const Eigen::VectorXd& observed);

// (rmse, r2); r2 is NaN when the observations are constant.
std::pair<double, double> rmse_r2(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs);

// Bundled report for one fitted model (filled by the pipeline).
struct MetricReport {
  double waic = 0.0, waic_se = 0.0, p_waic = 0.0;
  double loo_elpd = 0.0, loo_se = 0.0;
  int loo_high_k = 0;
  double mean_crps = 0.0;
  CoverageResult coverage;
  double in_rmse = 0.0, in_r2 = 0.0;
  double out_rmse = 0.0, out_r2 = 0.0;  // NaN when no held-out cells
  double lp_rhat = 0.0, lp_ess_bulk = 0.0, lp_ess_tail = 0.0;
  double max_param_rhat = 0.0;
  std::string to_text() const;
};

}  // namespace dart
