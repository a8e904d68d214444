#include "dart/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dart/stats.hpp"

namespace dart {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Splits each chain in half (dropping the middle draw of odd-length chains).
std::vector<std::vector<double>> split_halves(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + half);
    out.emplace_back(c.end() - half, c.end());
  }
  return out;
}

bool is_constant(const std::vector<std::vector<double>>& chains) {
  double first = kNaN;
  bool seen = false;
  for (const auto& c : chains)
    for (double v : c) {
      if (!seen) {
        first = v;
        seen = true;
      } else if (v != first) {
        return false;
      }
    }
  return true;
}

// Pools all sequences, replaces values by normal quantiles of their
// fractional average ranks.
std::vector<std::vector<double>> rank_normalize(const std::vector<std::vector<double>>& seqs) {
  std::vector<double> pooled;
  for (const auto& s : seqs) pooled.insert(pooled.end(), s.begin(), s.end());
  const std::vector<double> ranks = stats::average_ranks(pooled);
  const double total = static_cast<double>(pooled.size());
  std::vector<std::vector<double>> out(seqs.size());
  std::size_t pos = 0;
  for (std::size_t c = 0; c < seqs.size(); ++c) {
    out[c].resize(seqs[c].size());
    for (std::size_t i = 0; i < seqs[c].size(); ++i, ++pos)
      out[c][i] = stats::normal_quantile((ranks[pos] - 0.375) / (total + 0.25));
  }
  return out;
}

// Classic potential-scale-reduction on already-transformed sequences.
double rhat_of(const std::vector<std::vector<double>>& seqs) {
  const std::size_t m = seqs.size();
  const std::size_t n = seqs.front().size();
  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = stats::mean(seqs[c]);
    vars[c] = stats::variance(seqs[c]);
  }
  const double w = stats::mean(vars);
  const double b = static_cast<double>(n) * stats::variance(means);
  const double var_plus = (static_cast<double>(n - 1) / n) * w + b / static_cast<double>(n);
  if (!(w > 0.0)) return kNaN;
  return std::sqrt(var_plus / w);
}

// Multi-chain initial-positive-sequence ESS on transformed sequences:
// sum lag pairs while positive, enforce a monotone decreasing pair sequence.
double ess_of(const std::vector<std::vector<double>>& seqs) {
  const std::size_t m = seqs.size();
  const std::size_t n = seqs.front().size();
  if (n < 4) return kNaN;
  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = stats::mean(seqs[c]);
    vars[c] = stats::variance(seqs[c]);
  }
  const double w = stats::mean(vars);
  const double b_over_n = m > 1 ? stats::variance(means) : 0.0;
  const double var_plus = (static_cast<double>(n - 1) / n) * w + b_over_n;
  if (!(var_plus > 0.0)) return kNaN;

  // Biased (1/n) autocovariance at a given lag, averaged over chains.
  auto rho = [&](std::size_t lag) {
    double total = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i)
        s += (seqs[c][i] - means[c]) * (seqs[c][i + lag] - means[c]);
      total += s / static_cast<double>(n);
    }
    return 1.0 - (w - total / static_cast<double>(m)) / var_plus;
  };

  const double rho0 = rho(0);
  double pair = rho0 + rho(1);
  double sum_pairs = 0.0;
  double pair_prev = std::numeric_limits<double>::infinity();
  std::size_t t = 0;
  while (t + 1 < n && pair > 0.0) {
    if (pair > pair_prev) pair = pair_prev;
    sum_pairs += pair;
    pair_prev = pair;
    t += 2;
    if (t + 1 >= n) break;
    pair = rho(t) + rho(t + 1);
  }
  const double total_draws = static_cast<double>(n) * static_cast<double>(m);
  const double tau = std::max(2.0 * sum_pairs - rho0, 1.0 / std::log10(total_draws + 10.0));
  return std::min(total_draws / tau, total_draws * std::log10(total_draws));
}

void check_chains(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) throw std::invalid_argument("diagnostics: no chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != n)
      throw std::invalid_argument("diagnostics: chains must have equal length");
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
  check_chains(chains);
  if (chains.front().size() < 4 || is_constant(chains)) return kNaN;
  return rhat_of(rank_normalize(split_halves(chains)));
}

double ess_bulk(const std::vector<std::vector<double>>& chains) {
  check_chains(chains);
  if (chains.front().size() < 4 || is_constant(chains)) return kNaN;
  return ess_of(rank_normalize(split_halves(chains)));
}

double ess_tail(const std::vector<std::vector<double>>& chains) {
  check_chains(chains);
  if (chains.front().size() < 4 || is_constant(chains)) return kNaN;
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  double ess_min = std::numeric_limits<double>::infinity();
  for (double q : {0.05, 0.95}) {
    const double cut = stats::quantile(pooled, q);
    std::vector<std::vector<double>> ind;
    for (const auto& c : chains) {
      std::vector<double> v(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) v[i] = c[i] <= cut ? 1.0 : 0.0;
      ind.push_back(std::move(v));
    }
    if (is_constant(ind)) return kNaN;
    ess_min = std::min(ess_min, ess_of(split_halves(ind)));
  }
  return ess_min;
}

WaicResult waic(const Eigen::MatrixXd& loglik) {
  const Eigen::Index s = loglik.rows(), c = loglik.cols();
  if (s < 1 || c < 1) throw std::invalid_argument("waic: empty log-likelihood matrix");
  WaicResult out;
  out.pointwise_elpd.resize(c);
  std::vector<double> pointwise_waic(c);
  for (Eigen::Index i = 0; i < c; ++i) {
    std::vector<double> col(s);
    for (Eigen::Index r = 0; r < s; ++r) col[r] = loglik(r, i);
    const double lppd = stats::log_sum_exp(col) - std::log(static_cast<double>(s));
    const double p = s > 1 ? stats::variance(col) : 0.0;
    out.pointwise_elpd[i] = lppd - p;
    pointwise_waic[i] = -2.0 * (lppd - p);
    out.elpd += lppd - p;
    out.p_eff += p;
  }
  out.waic = -2.0 * out.elpd;
  out.se = c > 1 ? std::sqrt(static_cast<double>(c) * stats::variance(pointwise_waic)) : 0.0;
  return out;
}

namespace {

struct GpdFit {
  double k = kNaN;
  double sigma = kNaN;
};

// Zhang & Stephens (2009) posterior-mean estimator on sorted exceedances,
// with the weak k regularization toward 0.5.
GpdFit gpd_fit(const std::vector<double>& x_sorted) {
  const std::size_t n = x_sorted.size();
  const std::size_t grid = 30 + static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const double x_max = x_sorted.back();
  const double x_quart = x_sorted[static_cast<std::size_t>(std::floor(n / 4.0 + 0.5)) - 1];
  std::vector<double> bs(grid), prof(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    bs[j] = 1.0 / x_max +
            (1.0 - std::sqrt(static_cast<double>(grid) / (static_cast<double>(j) + 0.5))) /
                (3.0 * x_quart);
    double k = 0.0;
    for (double v : x_sorted) k += std::log1p(-bs[j] * v);
    k = -k / static_cast<double>(n);
    prof[j] = static_cast<double>(n) * (std::log(bs[j] / k) + k - 1.0);
  }
  double b_hat = 0.0, w_total = 0.0;
  for (std::size_t j = 0; j < grid; ++j) {
    double denom = 0.0;
    for (std::size_t l = 0; l < grid; ++l) denom += std::exp(prof[l] - prof[j]);
    const double w = 1.0 / denom;
    b_hat += w * bs[j];
    w_total += w;
  }
  b_hat /= w_total;
  double k_hat = 0.0;
  for (double v : x_sorted) k_hat += std::log1p(-b_hat * v);
  k_hat = -k_hat / static_cast<double>(n);
  GpdFit fit;
  fit.sigma = k_hat / b_hat;
  fit.k = (static_cast<double>(n) * k_hat + 10.0 * 0.5) / (static_cast<double>(n) + 10.0);
  return fit;
}

double gpd_quantile(double p, double k, double sigma) {
  if (std::abs(k) < 1e-12) return -sigma * std::log1p(-p);
  return sigma * std::expm1(-k * std::log1p(-p)) / k;
}

}  // namespace

PsisLooResult psis_loo(const Eigen::MatrixXd& loglik) {
  const Eigen::Index s = loglik.rows(), c = loglik.cols();
  if (s < 1 || c < 1) throw std::invalid_argument("psis_loo: empty log-likelihood matrix");
  PsisLooResult out;
  out.pointwise_elpd.resize(c);
  out.pareto_k.resize(c);

  const auto tail_size = static_cast<std::size_t>(
      std::ceil(std::min(0.2 * static_cast<double>(s), 3.0 * std::sqrt(static_cast<double>(s)))));
  for (Eigen::Index i = 0; i < c; ++i) {
    std::vector<double> lw(s);
    double lw_max = kNegInf;
    for (Eigen::Index r = 0; r < s; ++r) {
      lw[r] = -loglik(r, i);
      lw_max = std::max(lw_max, lw[r]);
    }
    std::vector<double> ratio(s);
    for (Eigen::Index r = 0; r < s; ++r) ratio[r] = std::exp(lw[r] - lw_max);

    double k_hat = kNegInf;
    if (tail_size >= 5 && static_cast<std::size_t>(s) > tail_size) {
      std::vector<std::size_t> order(s);
      for (Eigen::Index r = 0; r < s; ++r) order[r] = static_cast<std::size_t>(r);
      std::sort(order.begin(), order.end(),
                [&ratio](std::size_t a, std::size_t b) { return ratio[a] < ratio[b]; });
      const double cutoff = ratio[order[s - tail_size - 1]];
      const double r_max = ratio[order[s - 1]];
      std::vector<double> exceed;
      exceed.reserve(tail_size);
      for (std::size_t t = s - tail_size; t < static_cast<std::size_t>(s); ++t)
        exceed.push_back(ratio[order[t]] - cutoff);
      // Constant ratios need no smoothing and are flagged with k = -inf.
      if (exceed.back() > 1e-12 * r_max && exceed.back() > 0.0) {
        const GpdFit fit = gpd_fit(exceed);
        k_hat = fit.k;
        if (std::isfinite(fit.k) && fit.sigma > 0.0) {
          for (std::size_t t = 0; t < tail_size; ++t) {
            const double p = (static_cast<double>(t) + 0.5) / static_cast<double>(tail_size);
            const double smoothed = cutoff + gpd_quantile(p, fit.k, fit.sigma);
            ratio[order[s - tail_size + t]] = std::min(smoothed, r_max);
          }
        }
      }
    }
    // elpd_i = log(sum_r w_r p(y_i | theta_r)) - log(sum_r w_r), stably on
    // the log scale.
    std::vector<double> num(s), den(s);
    for (Eigen::Index r = 0; r < s; ++r) {
      den[r] = std::log(ratio[r]);
      num[r] = den[r] + loglik(r, i);
    }
    out.pointwise_elpd[i] = stats::log_sum_exp(num) - stats::log_sum_exp(den);
    out.pareto_k[i] = k_hat;
    if (k_hat > 0.7) ++out.n_high_k;
    out.elpd += out.pointwise_elpd[i];
  }
  if (c > 1) {
    std::vector<double> pw(out.pointwise_elpd.data(), out.pointwise_elpd.data() + c);
    out.se = std::sqrt(static_cast<double>(c) * stats::variance(pw));
  }
  return out;
}

double crps(const std::vector<double>& samples, double y) {
  if (samples.empty()) throw std::invalid_argument("crps: empty sample");
  const std::size_t m = samples.size();
  double abs_err = 0.0;
  for (double v : samples) abs_err += std::abs(v - y);
  abs_err /= static_cast<double>(m);
  // mean |X - X'| over all ordered pairs (self-pairs contribute zero) via
  // the sorted-sample identity.
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  double pair_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    pair_sum += (2.0 * static_cast<double>(i + 1) - static_cast<double>(m) - 1.0) * sorted[i];
  const double mean_pair = 2.0 * pair_sum / (static_cast<double>(m) * static_cast<double>(m));
  return abs_err - 0.5 * mean_pair;
}

CoverageResult coverage_by_quintile(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                    const Eigen::VectorXd& observed) {
  const Eigen::Index n = observed.size();
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("coverage_by_quintile: size mismatch");
  if (n == 0) throw std::invalid_argument("coverage_by_quintile: no cells");

  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&observed](Eigen::Index a, Eigen::Index b) {
    return std::abs(observed[a]) < std::abs(observed[b]);
  });

  CoverageResult out;
  out.n = n;
  const int n_bins = 5;
  const Eigen::Index base = n / n_bins, rem = n % n_bins;
  Eigen::Index pos = 0;
  for (int b = 0; b < n_bins; ++b) {
    const Eigen::Index size = base + (b < rem ? 1 : 0);
    CoverageBin bin;
    bin.n = size;
    if (size > 0) {
      bin.abs_mean_lo = std::abs(observed[order[pos]]);
      bin.abs_mean_hi = std::abs(observed[order[pos + size - 1]]);
    }
    for (Eigen::Index t = 0; t < size; ++t) {
      const Eigen::Index i = order[pos + t];
      if (observed[i] >= lower[i] && observed[i] <= upper[i]) {
        ++bin.covered;
        ++out.covered;
      }
    }
    pos += size;
    out.bins.push_back(bin);
  }
  out.overall = static_cast<double>(out.covered) / static_cast<double>(out.n);
  return out;
}

std::pair<double, double> rmse_r2(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs) {
  if (pred.size() != obs.size()) throw std::invalid_argument("rmse_r2: size mismatch");
  if (pred.size() == 0) throw std::invalid_argument("rmse_r2: empty input");
  const double sse = (pred - obs).squaredNorm();
  const double rmse = std::sqrt(sse / static_cast<double>(pred.size()));
  const double mean = obs.mean();
  const double sst = (obs.array() - mean).matrix().squaredNorm();
  const double r2 = sst > 0.0 ? 1.0 - sse / sst : kNaN;
  return {rmse, r2};
}

std::string MetricReport::to_text() const {
  std::ostringstream os;
  os << "waic:        " << waic << " (se " << waic_se << ", p_eff " << p_waic << ")\n";
  os << "loo elpd:    " << loo_elpd << " (se " << loo_se << ", high-k cells " << loo_high_k
     << ")\n";
  os << "mean crps:   " << mean_crps << "\n";
  os << "coverage:    " << coverage.overall << " over " << coverage.n << " cells\n";
  for (std::size_t b = 0; b < coverage.bins.size(); ++b) {
    const auto& bin = coverage.bins[b];
    os << "  quintile " << (b + 1) << " [" << bin.abs_mean_lo << ", " << bin.abs_mean_hi
       << "]: " << bin.rate() << " (" << bin.covered << "/" << bin.n << ")\n";
  }
  os << "in-sample:   rmse " << in_rmse << ", r2 " << in_r2 << "\n";
  if (std::isfinite(out_rmse))
    os << "out-sample:  rmse " << out_rmse << ", r2 " << out_r2 << "\n";
  os << "lp rhat:     " << lp_rhat << " (bulk ess " << lp_ess_bulk << ", tail ess "
     << lp_ess_tail << ")\n";
  os << "max rhat:    " << max_param_rhat << "\n";
  return os.str();
}

}  // namespace dart
