// Acceptance gate: every release-blocking capability is checked end to end
// and reported as one PASS/FAIL line. The exit status is the number of
// failing criteria. An optional argument restricts the run to criteria whose
// name contains it, e.g. `dart_acceptance gradients`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dart/align.hpp"
#include "dart/curvefit.hpp"
#include "dart/diagnostics.hpp"
#include "dart/ingest.hpp"
#include "dart/kernel.hpp"
#include "dart/model.hpp"
#include "dart/pipeline.hpp"
#include "dart/rng.hpp"
#include "dart/sampler.hpp"
#include "dart/simulate.hpp"
#include "dart/stats.hpp"

#include "../unit/test_helpers.hpp"

using namespace dart;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Analytic gradients agree with central finite differences on randomized
//    covariate-model instances (every coordinate, 20 instances, under a
//    minute).

Outcome check_gradients() {
  const auto started = std::chrono::steady_clock::now();
  const int n_instances = 20;
  const double h = 1e-5;
  double worst = 0.0;
  int worst_instance = -1;

  for (int t = 0; t < n_instances; ++t) {
    Rng rng(split_seed(1000, static_cast<std::uint64_t>(t)));
    const DoseGrid grid = simulation_dose_grid(4);
    const ObservationSet data = testing::random_observations(3, 3, grid, 3, rng, 0.85);
    const CovariateSet cov = testing::random_covariates(3, 3, 2, 3, rng);
    const DartModel model(data, cov, Hyperparameters{}, ModelKind::kDart, 2);
    const ParamLayout& layout = model.layout();

    Eigen::VectorXd x = pack_state(testing::random_state(layout, rng), layout);
    Eigen::VectorXd grad(layout.size);
    model.log_density_gradient(x, &grad);
    for (int i = 0; i < layout.size; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd =
          (model.log_density_gradient(xp, nullptr) - model.log_density_gradient(xm, nullptr)) /
          (2.0 * h);
      const double rel = std::abs(grad[i] - fd) /
                         std::max({std::abs(grad[i]), std::abs(fd), 1e-3});
      if (rel > worst) {
        worst = rel;
        worst_instance = t;
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  Outcome out;
  out.pass = worst < 1e-5 && secs < 60.0;
  out.detail = "max rel err " + fmt(worst, "%.2e") + " (instance " +
               std::to_string(worst_instance) + ") in " + fmt(secs, "%.1f") + "s";
  return out;
}

// ---------------------------------------------------------------------------
// 2. The no-covariate model recovers a synthetic 20x20x5 surface: held-out
//    correlation 0.8 / 0.7 at 10% / 50% missingness, in-sample 0.9, within
//    30 minutes.

Outcome check_recovery() {
  const auto started = std::chrono::steady_clock::now();
  const double pis[2] = {0.1, 0.5};
  const double out_required[2] = {0.8, 0.7};
  std::ostringstream detail;
  bool pass = true;

  for (int v = 0; v < 2; ++v) {
    SimulationConfig config;
    config.n_chems = 20;
    config.n_genes = 20;
    config.n_doses = 5;
    config.n_factors = 5;
    config.replicates = 3;
    config.kind = ModelKind::kDartNc;
    config.pi_miss = pis[v];
    config.seed = 2021 + static_cast<std::uint64_t>(v);
    const SyntheticDataset ds = simulate_dataset(config);

    FitOptions options;
    options.kind = ModelKind::kDartNc;
    options.n_factors = 5;
    options.sampler.chains = 1;
    options.sampler.warmup = 1000;
    options.sampler.samples = 1000;
    options.sampler.seed = 7 + static_cast<std::uint64_t>(v);
    const DartFit fit = fit_dart(ds.data, ds.covariates, options);

    const DartModel model(ds.data, ds.covariates, config.hyper, config.kind, 5);
    const MeanEffect mean = posterior_mean_effect(model, fit.draws);
    const double out_corr = effect_correlation(mean, ds.heldout.cells);
    const double in_corr = effect_correlation(mean, ds.data.cells);
    pass = pass && out_corr >= out_required[v] && in_corr >= 0.9;
    detail << (v ? "; " : "") << "pi=" << pis[v] << ": out corr " << fmt(out_corr, "%.3f")
           << " (need " << out_required[v] << "), in corr " << fmt(in_corr, "%.3f");
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  Outcome out;
  out.pass = pass && secs < 1800.0;
  out.detail = detail.str() + ", " + fmt(secs, "%.0f") + "s";
  return out;
}

// ---------------------------------------------------------------------------
// 3. Five-fold pair holdout on a 10x10 covariate dataset: the covariate model
//    predicts unseen chemical-gene pairs at least as well as the no-covariate
//    model (mean out-of-sample R2 within 0.02), within 45 minutes.

Outcome check_covariate_parity() {
  const auto started = std::chrono::steady_clock::now();
  SimulationConfig config;
  config.n_chems = 10;
  config.n_genes = 10;
  config.n_doses = 5;
  config.n_factors = 3;
  config.replicates = 3;
  config.n_w = 3;
  config.n_z = 4;
  config.z_prevalence = 0.3;
  config.kind = ModelKind::kDart;
  config.seed = 303;
  const SyntheticDataset ds = simulate_dataset(config);
  const auto folds = mask_pairs(ds, 5, 99);

  auto fold_r2 = [&](const SyntheticDataset& fold, bool covariates, std::uint64_t seed) {
    FitOptions options;
    options.kind = covariates ? ModelKind::kDart : ModelKind::kDartNc;
    options.n_factors = 3;
    options.sampler.chains = 1;
    options.sampler.warmup = 500;
    options.sampler.samples = 500;
    options.sampler.seed = seed;
    const CovariateSet cov = covariates ? fold.covariates : CovariateSet{};
    const DartFit fit = fit_dart(fold.data, cov, options);
    const DartModel model(fold.data, cov, config.hyper, options.kind, 3);
    const MeanEffect mean = posterior_mean_effect(model, fit.draws);
    return rmse_r2(effect_at_cells(mean, fold.heldout.cells),
                   replicate_means(fold.heldout.cells))
        .second;
  };

  double dart_sum = 0.0, nc_sum = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    dart_sum += fold_r2(folds[f], true, 40 + f);
    nc_sum += fold_r2(folds[f], false, 80 + f);
  }
  const double dart_mean = dart_sum / static_cast<double>(folds.size());
  const double nc_mean = nc_sum / static_cast<double>(folds.size());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  Outcome out;
  out.pass = dart_mean >= nc_mean - 0.02 && secs < 2700.0;
  out.detail = "mean out R2: with covariates " + fmt(dart_mean, "%.3f") + ", without " +
               fmt(nc_mean, "%.3f") + ", " + fmt(secs, "%.0f") + "s";
  return out;
}

// ---------------------------------------------------------------------------
// 4. Parametric curve fits recover noiseless generating parameters to 0.1%
//    and respect the midpoint identity f(ac50) = top / 2.

Outcome check_curve_recovery() {
  std::vector<double> x;
  for (int i = 0; i < 8; ++i) x.push_back(0.01 * std::pow(10.0, i * 4.0 / 7.0));

  struct Case {
    CurveKind kind;
    double top, ac50, power;
  };
  const Case cases[] = {
      {CurveKind::kHill, 1.8, 3.5, 1.7},
      {CurveKind::kExp5, -1.4, 2.0, 0.9},
      {CurveKind::kPower, 0.25, 0.0, 1.3},  // ac50 unused for the power law
  };

  bool pass = true;
  std::ostringstream detail;
  for (const Case& c : cases) {
    std::vector<double> y;
    for (double v : x) {
      switch (c.kind) {
        case CurveKind::kHill: y.push_back(hill_response(v, c.top, c.ac50, c.power)); break;
        case CurveKind::kExp5: y.push_back(exp5_response(v, c.top, c.ac50, c.power)); break;
        case CurveKind::kPower: y.push_back(power_response(v, c.top, c.power)); break;
      }
    }
    const ParametricFit fit = fit_curve(x, y, c.kind);
    double err = std::abs(fit.top - c.top) / std::abs(c.top);
    err = std::max(err, std::abs(fit.power - c.power) / c.power);
    if (c.kind != CurveKind::kPower)
      err = std::max(err, std::abs(fit.ac50 - c.ac50) / c.ac50);
    double mid_err = 0.0;
    if (c.kind != CurveKind::kPower)
      mid_err = std::abs(fit.evaluate(fit.ac50) - 0.5 * fit.top);
    pass = pass && fit.converged && err < 1e-3 && mid_err < 1e-12;
    detail << curve_kind_name(c.kind) << " rel err " << fmt(err, "%.1e") << "; ";
  }
  Outcome out;
  out.pass = pass;
  out.detail = detail.str();
  return out;
}

// ---------------------------------------------------------------------------
// 5. Reported metrics agree with independently coded oracles: WAIC / CRPS /
//    R2 to 1e-10, PSIS-LOO within 0.05 of an exact leave-one-out refit, and
//    the sampler passes split-Rhat and KS normality checks on a 5-D Gaussian.

class GaussianTarget final : public LogDensityModel {
 public:
  GaussianTarget() {
    mean_ = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
    Eigen::VectorXd sd(5);
    sd << 1.0, 1.3, 0.7, 2.0, 0.5;
    Eigen::MatrixXd cov = sd.cwiseProduct(sd).asDiagonal();
    cov(0, 1) = cov(1, 0) = 0.6 * sd[0] * sd[1];
    precision_ = cov.inverse();
    sd_ = sd;
  }
  int dim() const override { return 5; }
  double log_density_gradient(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const override {
    const Eigen::VectorXd centered = x - mean_;
    const Eigen::VectorXd px = precision_ * centered;
    if (grad) *grad = -px;
    return -0.5 * centered.dot(px);
  }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& sd() const { return sd_; }

 private:
  Eigen::VectorXd mean_, sd_;
  Eigen::MatrixXd precision_;
};

Outcome check_metric_oracles() {
  bool pass = true;
  std::ostringstream detail;

  // WAIC against a direct two-pass computation.
  Rng rng(505);
  Eigen::MatrixXd ll(5, 4);
  for (int s = 0; s < 5; ++s)
    for (int c = 0; c < 4; ++c) ll(s, c) = -1.0 + 0.4 * rng.normal();
  double oracle_elpd = 0.0, oracle_p = 0.0;
  for (int c = 0; c < 4; ++c) {
    double mx = ll.col(c).maxCoeff(), acc = 0.0;
    for (int s = 0; s < 5; ++s) acc += std::exp(ll(s, c) - mx);
    const double lppd = mx + std::log(acc / 5.0);
    const double m = ll.col(c).mean();
    double var = 0.0;
    for (int s = 0; s < 5; ++s) var += (ll(s, c) - m) * (ll(s, c) - m);
    var /= 4.0;
    oracle_elpd += lppd - var;
    oracle_p += var;
  }
  const WaicResult w = waic(ll);
  const double waic_err = std::max({std::abs(w.elpd - oracle_elpd), std::abs(w.p_eff - oracle_p),
                                    std::abs(w.waic + 2.0 * oracle_elpd)});
  pass = pass && waic_err < 1e-10;
  detail << "waic err " << fmt(waic_err, "%.1e");

  // CRPS two-point oracle plus a brute-force pair sum.
  const double crps_two = std::abs(crps({0.0, 2.0}, 1.0) - 0.5);
  std::vector<double> sample = {0.3, -1.1, 0.7, 2.2, -0.4, 0.9};
  const double y0 = 0.25;
  double mad = 0.0, pair = 0.0;
  for (double a : sample) {
    mad += std::abs(a - y0);
    for (double b : sample) pair += std::abs(a - b);
  }
  const double n = static_cast<double>(sample.size());
  const double crps_err =
      std::max(crps_two, std::abs(crps(sample, y0) - (mad / n - 0.5 * pair / (n * n))));
  pass = pass && crps_err < 1e-10;
  detail << ", crps err " << fmt(crps_err, "%.1e");

  // R2 by its definition.
  Eigen::VectorXd pred(4), obs(4);
  pred << 0.5, 1.0, -0.25, 2.0;
  obs << 0.75, 0.8, -0.5, 1.8;
  const auto [rmse, r2] = rmse_r2(pred, obs);
  const double sst = (obs.array() - obs.mean()).square().sum();
  const double sse = (obs - pred).squaredNorm();
  const double r2_err = std::max(std::abs(r2 - (1.0 - sse / sst)),
                                 std::abs(rmse - std::sqrt(sse / 4.0)));
  pass = pass && r2_err < 1e-10;
  detail << ", r2 err " << fmt(r2_err, "%.1e");

  // PSIS-LOO against the closed-form leave-one-out refit in the conjugate
  // normal model y_i ~ N(theta, 1), theta ~ N(0, 1).
  const std::vector<double> ys = {0.3, -0.9, 0.8, 1.2, -0.4};
  const int n_obs = static_cast<int>(ys.size());
  double ysum = 0.0;
  for (double v : ys) ysum += v;
  const double post_mean = ysum / (n_obs + 1.0), post_var = 1.0 / (n_obs + 1.0);
  const int n_draws = 8000;
  Rng prng(55);
  Eigen::MatrixXd loglik(n_draws, n_obs);
  for (int s = 0; s < n_draws; ++s) {
    const double theta = prng.normal(post_mean, std::sqrt(post_var));
    for (int i = 0; i < n_obs; ++i) {
      const double r = ys[i] - theta;
      loglik(s, i) = -0.5 * std::log(2.0 * M_PI) - 0.5 * r * r;
    }
  }
  double exact_loo = 0.0;
  for (int i = 0; i < n_obs; ++i) {
    const double m = (ysum - ys[i]) / n_obs;  // posterior mean without y_i
    const double v = 1.0 / n_obs;
    const double pred_var = 1.0 + v;
    const double r = ys[i] - m;
    exact_loo += -0.5 * std::log(2.0 * M_PI * pred_var) - 0.5 * r * r / pred_var;
  }
  const PsisLooResult loo = psis_loo(loglik);
  const double loo_err = std::abs(loo.elpd - exact_loo);
  pass = pass && loo_err < 0.05;
  detail << ", loo err " << fmt(loo_err, "%.3f");

  // Sampler calibration on a correlated 5-D Gaussian: 4 chains x 1000 draws.
  // Thinned so the normality test sees near-independent draws; 1000 kept
  // per chain, 4000 total.
  GaussianTarget target;
  SamplerConfig sampler;
  sampler.chains = 4;
  sampler.warmup = 800;
  sampler.samples = 4000;
  sampler.thin = 4;
  sampler.target_accept = 0.9;
  sampler.seed = 606;
  const PosteriorDraws draws = run_chains(target, sampler);
  double max_rhat = 0.0, min_ks = 1.0;
  for (int d = 0; d < 5; ++d) {
    std::vector<double> values(draws.size());
    std::vector<double> standardized(draws.size());
    for (std::size_t s = 0; s < draws.size(); ++s) {
      values[s] = draws.draws[s][d];
      standardized[s] = (values[s] - target.mean()[d]) / target.sd()[d];
    }
    max_rhat = std::max(max_rhat, split_rhat(per_chain_series(draws, values)));
    min_ks = std::min(min_ks, stats::ks_test_normal(standardized));
  }
  pass = pass && max_rhat <= 1.01 && min_ks > 0.01;
  detail << ", max rhat " << fmt(max_rhat, "%.4f") << ", min KS p " << fmt(min_ks, "%.3f");

  Outcome out;
  out.pass = pass;
  out.detail = detail.str();
  return out;
}

// ---------------------------------------------------------------------------
// 6. Posterior calibration: across prior-simulated 10x10 datasets, central
//    95% intervals of the noise-free surface cover the generating truth at a
//    pooled rate inside [0.90, 0.99], within 30 minutes.

Outcome check_calibration() {
  const auto started = std::chrono::steady_clock::now();
  long covered = 0, total = 0;
  const int n_reps = 8;

  for (int rep = 0; rep < n_reps; ++rep) {
    SimulationConfig config;
    config.n_chems = 10;
    config.n_genes = 10;
    config.n_doses = 5;
    config.n_factors = 3;
    config.replicates = 3;
    config.kind = ModelKind::kDartNc;
    config.seed = 6000 + static_cast<std::uint64_t>(rep);
    const SyntheticDataset ds = simulate_dataset(config);

    FitOptions options;
    options.kind = ModelKind::kDartNc;
    options.n_factors = 3;
    options.sampler.chains = 1;
    options.sampler.warmup = 400;
    options.sampler.samples = 400;
    options.sampler.seed = 60 + static_cast<std::uint64_t>(rep);
    const DartFit fit = fit_dart(ds.data, ds.covariates, options);
    const DartModel model(ds.data, ds.covariates, config.hyper, config.kind, 3);

    // Per-draw surfaces at every observed cell.
    const std::size_t n_cells = ds.data.cells.size();
    std::vector<std::vector<double>> values(n_cells);
    for (auto& v : values) v.reserve(fit.draws.size());
    for (std::size_t s = 0; s < fit.draws.size(); ++s) {
      const MeanEffect surface = model.mean_effect_at(fit.draws.draws[s]);
      for (std::size_t c = 0; c < n_cells; ++c) {
        const auto& cell = ds.data.cells[c];
        values[c].push_back(surface(cell.chem, cell.gene, cell.dose));
      }
    }
    for (std::size_t c = 0; c < n_cells; ++c) {
      const auto& cell = ds.data.cells[c];
      const double truth = ds.truth(cell.chem, cell.gene, cell.dose);
      const double lo = stats::quantile(values[c], 0.025);
      const double hi = stats::quantile(values[c], 0.975);
      ++total;
      if (truth >= lo && truth <= hi) ++covered;
    }
  }
  const double rate = static_cast<double>(covered) / static_cast<double>(total);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  Outcome out;
  out.pass = rate >= 0.90 && rate <= 0.99 && secs < 1800.0;
  out.detail = "95% intervals cover " + fmt(100.0 * rate, "%.1f") + "% of " +
               std::to_string(total) + " cells over " + std::to_string(n_reps) + " datasets, " +
               fmt(secs, "%.0f") + "s";
  return out;
}

// ---------------------------------------------------------------------------
// 7. Factor alignment undoes random rotation / sign / permutation transforms
//    (recovered loadings within 1e-6 of the pivot) while leaving every
//    draw's mean surface untouched to 1e-8.

Outcome check_alignment() {
  const int n_genes = 4, n_doses = 4, n_factors = 3, n_chems = 6;
  const DoseGrid grid = simulation_dose_grid(n_doses);
  const Hyperparameters hyper;
  const ParamLayout layout =
      make_layout(ModelKind::kDartNc, n_chems, n_genes, n_doses, n_factors, 0, 0);

  Rng rng(707);
  LatentState base = testing::random_state(layout, rng);
  base.log_delta.setZero();
  base.log_tau0 = 0.0;
  // Sharply separated loading columns so the varimax optimum is unambiguous.
  const int rows = n_genes * n_doses;
  Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(rows, n_factors);
  for (int r = 0; r < rows; ++r) {
    const int owner = r / (rows / n_factors + 1);
    for (int k = 0; k < n_factors; ++k)
      flat(r, k) = k == owner ? (1.2 + rng.uniform()) * (r % 2 ? 1.0 : -1.0)
                              : 0.05 * rng.normal();
  }
  const auto kernel = kernel_matrix(grid, hyper.length_scale);
  for (int j = 0; j < n_genes; ++j)
    base.lambda_raw[j] = kernel.chol.triangularView<Eigen::Lower>().solve(
        flat.middleRows(j * n_doses, n_doses));

  auto surface_of = [&](const Eigen::VectorXd& x) {
    const LatentState s = unpack_state(x, layout);
    const auto lam = loadings(s, grid, hyper);
    Eigen::MatrixXd f(rows, n_factors);
    for (int j = 0; j < n_genes; ++j) f.middleRows(j * n_doses, n_doses) = lam[j];
    return Eigen::MatrixXd(s.eta * f.transpose());
  };

  PosteriorDraws draws;
  draws.dim = layout.size;
  draws.draws.push_back(pack_state(base, layout));
  draws.log_post.push_back(0.0);
  draws.divergent.push_back(0);
  draws.chain.push_back(0);
  for (int t = 0; t < 10; ++t) {
    // Haar-ish orthogonal transform composed with a random signed permutation.
    Eigen::MatrixXd m(n_factors, n_factors);
    for (int a = 0; a < n_factors; ++a)
      for (int b = 0; b < n_factors; ++b) m(a, b) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < n_factors; ++k)
      if (r(k, k) < 0.0) q.col(k) = -q.col(k);
    Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(n_factors, n_factors);
    std::vector<int> order = {0, 1, 2};
    for (int k = n_factors - 1; k > 0; --k) std::swap(order[k], order[rng.integer(k + 1)]);
    for (int k = 0; k < n_factors; ++k)
      perm(order[k], k) = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const Eigen::MatrixXd transform = q * perm;

    LatentState other = base;
    for (auto& a : other.lambda_raw) a = (a * transform).eval();
    other.eta = (base.eta * transform).eval();
    draws.draws.push_back(pack_state(other, layout));
    draws.log_post.push_back(-1.0 - t);
    draws.divergent.push_back(0);
    draws.chain.push_back(0);
  }
  draws.chain_stats.resize(1);

  const AlignedDraws aligned = match_align(draws, layout, grid, hyper, 0);
  double lambda_err = 0.0, surface_err = 0.0;
  for (std::size_t s = 0; s < draws.size(); ++s) {
    lambda_err = std::max(lambda_err,
                          (aligned.lambda[s] - aligned.lambda[0]).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd before = surface_of(draws.draws[s]);
    const Eigen::MatrixXd after = aligned.eta[s] * aligned.lambda[s].transpose();
    surface_err = std::max(surface_err, (before - after).cwiseAbs().maxCoeff());
  }
  Outcome out;
  out.pass = lambda_err < 1e-6 && surface_err < 1e-8;
  out.detail = "pivot mismatch " + fmt(lambda_err, "%.1e") + ", surface drift " +
               fmt(surface_err, "%.1e") + " over 10 random transforms";
  return out;
}

// ---------------------------------------------------------------------------
// 8. Dose handling and dataset serialization: every bin boundary maps to its
//    bin, and a simulated dataset survives write -> load unchanged.

Outcome check_dose_bins_and_io() {
  bool pass = true;
  std::ostringstream detail;

  const BinTable bins = BinTable::standard();
  const std::pair<double, double> cases[] = {
      {0.01, -4.0}, {0.04, -4.0}, {0.05, -2.0}, {0.3, -2.0},
      {0.4, 0.0},   {2.5, 0.0},   {3.0, 2.0},   {20.0, 2.0},
      {25.0, 4.0},  {100.0, 4.0}, {200.0, 6.0}, {300.0, 6.0},
  };
  int bad_bins = 0;
  for (const auto& [dose, label] : cases) {
    const auto got = bins.discretize(dose);
    if (!got || *got != label) ++bad_bins;
  }
  if (bins.discretize(0.009) || bins.discretize(300.1)) ++bad_bins;
  pass = pass && bad_bins == 0;
  detail << bad_bins << " bin mismatches";

  SimulationConfig config;
  config.n_chems = 6;
  config.n_genes = 5;
  config.n_doses = 4;
  config.n_factors = 2;
  config.replicates = 3;
  config.n_w = 2;
  config.n_z = 2;
  config.pi_miss = 0.3;
  config.kind = ModelKind::kDart;
  config.seed = 808;
  const SyntheticDataset ds = simulate_dataset(config);
  const std::string dir =
      (std::filesystem::temp_directory_path() / "dart_acceptance_dataset").string();
  std::filesystem::create_directories(dir);
  write_dataset(ds, dir);
  const SyntheticDataset back = load_dataset(dir);

  int io_errors = 0;
  auto expect = [&](bool ok) {
    if (!ok) ++io_errors;
  };
  expect(back.data.grid.coords == ds.data.grid.coords);
  expect(back.data.cells.size() == ds.data.cells.size());
  expect(back.heldout.cells.size() == ds.heldout.cells.size());
  for (std::size_t c = 0; c < ds.data.cells.size() && c < back.data.cells.size(); ++c) {
    expect(back.data.cells[c].chem == ds.data.cells[c].chem);
    expect(back.data.cells[c].gene == ds.data.cells[c].gene);
    expect(back.data.cells[c].dose == ds.data.cells[c].dose);
    expect(back.data.cells[c].responses == ds.data.cells[c].responses);
  }
  expect(back.mask == ds.mask);
  expect(back.covariates.w == ds.covariates.w);
  expect(back.covariates.z == ds.covariates.z);
  for (int j = 0; j < config.n_genes; ++j)
    expect(back.truth.by_gene[j] == ds.truth.by_gene[j]);
  expect(pack_state(back.true_state, back.true_layout) ==
         pack_state(ds.true_state, ds.true_layout));
  pass = pass && io_errors == 0;
  detail << ", " << io_errors << " io mismatches";

  Outcome out;
  out.pass = pass;
  out.detail = detail.str();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exact-gradients", check_gradients},
      {"surface-recovery", check_recovery},
      {"covariate-parity", check_covariate_parity},
      {"curve-recovery", check_curve_recovery},
      {"metric-oracles", check_metric_oracles},
      {"calibration-coverage", check_calibration},
      {"alignment-invariance", check_alignment},
      {"dose-bins-and-io", check_dose_bins_and_io},
  };

  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!filter.empty() && std::string(name).find(filter) == std::string::npos) continue;
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    std::cout << (outcome.pass ? "PASS" : "FAIL") << ": " << name << " — " << outcome.detail
              << std::endl;
    if (!outcome.pass) ++failures;
  }
  return failures;
}
