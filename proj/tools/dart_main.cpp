// Command-line driver: simulate / fit / predict / crossval / benchmark /
// diagnose / report on dose-response screening matrices.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dart/activity.hpp"
#include "dart/align.hpp"
#include "dart/config.hpp"
#include "dart/csv.hpp"
#include "dart/curvefit.hpp"
#include "dart/diagnostics.hpp"
#include "dart/draws_io.hpp"
#include "dart/ingest.hpp"
#include "dart/pipeline.hpp"
#include "dart/rng.hpp"
#include "dart/simulate.hpp"
#include "dart/stats.hpp"
#include "dart/version.hpp"

namespace fs = std::filesystem;
using namespace dart;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out_dir;
};

ConfigFile load_config_or_empty(const GlobalArgs& args) {
  if (args.config_path.empty()) return parse_config_text("");
  return load_config(args.config_path);
}

void write_manifest(const GlobalArgs& args, const ConfigFile& config, const std::string& command,
                    std::uint64_t seed) {
  auto out = csv::open_out((fs::path(args.out_dir) / "manifest.csv").string());
  out << "key,value\n";
  out << "version," << kVersion << '\n';
  out << "command," << command << '\n';
  out << "seed," << seed << '\n';
  out << "threads," << args.threads << '\n';
  out << "config," << config.path << '\n';
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config.content_hash));
  out << "config_hash," << hash << '\n';
}

// A dataset directory (written by `dart simulate`) is recognized by its
// meta.csv; anything else is treated as raw long-format CSV inputs.
bool is_dataset_dir(const std::string& path) {
  return fs::is_directory(path) && fs::exists(fs::path(path) / "meta.csv");
}

struct LoadedData {
  ObservationSet data;
  ObservationSet heldout;  // empty unless a dataset dir provided one
  CovariateSet covariates;
  std::string ingest_report;  // non-empty when raw CSVs were ingested
};

LoadedData load_input_data(const std::string& data_arg, const ConfigFile& config) {
  LoadedData loaded;
  if (is_dataset_dir(data_arg)) {
    SyntheticDataset ds = load_dataset(data_arg);
    loaded.data = std::move(ds.data);
    loaded.heldout = std::move(ds.heldout);
    loaded.covariates = std::move(ds.covariates);
    return loaded;
  }
  IngestPaths paths;
  paths.observations =
      data_arg.empty() ? config.get_string("data", "observations", "") : data_arg;
  if (paths.observations.empty())
    throw std::runtime_error("no input data: pass --data or set data.observations");
  paths.covariates_w = config.get_string("data", "covariates_w", "");
  paths.covariates_z = config.get_string("data", "covariates_z", "");
  IngestOptions options;
  options.pca_components = static_cast<int>(config.get_long("data", "pca_components", 0));
  IngestResult result = load_and_validate(paths, options);
  loaded.data = std::move(result.data);
  loaded.covariates = std::move(result.covariates);
  loaded.ingest_report = result.report.to_text();
  return loaded;
}

FitOptions make_fit_options(const ConfigFile& config, const GlobalArgs& args) {
  FitOptions options;
  apply_model_config(config, &options.kind, &options.n_factors, &options.hyper, &options.model);
  apply_sampler_config(config, &options.sampler);
  if (args.seed) options.sampler.seed = *args.seed;
  options.sampler.threads = args.threads;
  return options;
}

void write_predictions_csv(const std::string& path, const MeanEffect& effect,
                           const ObservationSet& data) {
  const BinTable bins = BinTable::standard();
  auto out = csv::open_out(path);
  out << "chemical_id,gene_id,dose_coord,dose_um,effect,fold_change\n";
  for (int i = 0; i < effect.n_chems; ++i) {
    for (int j = 0; j < effect.n_genes; ++j) {
      for (int d = 0; d < effect.n_doses; ++d) {
        const double s = effect(i, j, d);
        out << data.chem_ids[i] << ',' << data.gene_ids[j] << ','
            << csv::format(data.grid.coords[d]) << ','
            << csv::format(bins.representative(data.grid.coords[d])) << ',' << csv::format(s)
            << ',' << csv::format(std::exp2(s)) << '\n';
      }
    }
  }
}

std::vector<double> load_exposure(const std::string& path, const ObservationSet& data) {
  auto in = csv::open_in(path);
  std::string line;
  if (!std::getline(in, line) || csv::split(line) != std::vector<std::string>{"chemical_id",
                                                                              "exposure"})
    throw std::runtime_error("exposure file must have header chemical_id,exposure");
  std::map<std::string, double> by_id;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != 2) throw std::runtime_error("exposure row needs 2 fields: " + line);
    by_id[fields[0]] = csv::parse_double(fields[1], "exposure");
  }
  std::vector<double> exposure(data.n_chems, 0.0);
  for (int i = 0; i < data.n_chems; ++i) {
    const auto it = by_id.find(data.chem_ids[i]);
    if (it != by_id.end()) exposure[i] = it->second;
  }
  return exposure;
}

// --- command implementations --------------------------------------------

int run_simulate(const GlobalArgs& args) {
  const ConfigFile config = load_config_or_empty(args);
  SimulationConfig sim;
  {
    ModelKind kind = sim.kind;
    int factors = sim.n_factors;
    ModelOptions options;
    apply_model_config(config, &kind, &factors, &sim.hyper, &options);
  }
  apply_simulate_config(config, &sim);
  if (args.seed) sim.seed = *args.seed;
  fs::create_directories(args.out_dir);
  const SyntheticDataset dataset = simulate_dataset(sim);
  write_dataset(dataset, args.out_dir);
  write_manifest(args, config, "simulate", sim.seed);
  std::cout << "simulated " << dataset.config.n_chems << " chemicals x "
            << dataset.config.n_genes << " genes x " << dataset.config.n_doses << " doses ("
            << dataset.data.cells.size() << " observed cells, " << dataset.heldout.cells.size()
            << " held out) -> " << args.out_dir << '\n';
  return 0;
}

int run_fit(const GlobalArgs& args, const std::string& data_arg) {
  const ConfigFile config = load_config_or_empty(args);
  const LoadedData loaded = load_input_data(data_arg, config);
  const FitOptions options = make_fit_options(config, args);
  fs::create_directories(args.out_dir);
  if (!loaded.ingest_report.empty()) {
    auto rep = csv::open_out((fs::path(args.out_dir) / "ingest_report.txt").string());
    rep << loaded.ingest_report;
  }
  const DartFit fit = fit_dart(loaded.data, loaded.covariates, options);
  write_draws((fs::path(args.out_dir) / "draws.csv").string(), fit.draws, fit.layout, fit.grid);
  write_manifest(args, config, "fit", options.sampler.seed);
  auto txt = csv::open_out((fs::path(args.out_dir) / "fit.txt").string());
  txt << "model " << model_kind_name(options.kind) << ", " << options.n_factors << " factors, "
      << fit.layout.size << " parameters\n";
  txt << "draws " << fit.draws.size() << " across " << options.sampler.chains << " chain(s)\n";
  for (std::size_t c = 0; c < fit.draws.chain_stats.size(); ++c) {
    const ChainStats& st = fit.draws.chain_stats[c];
    txt << "chain " << c << ": step_size " << st.step_size << ", mean_accept " << st.mean_accept
        << ", divergences " << st.divergences << ", max_depth_hits " << st.max_depth_hits << '\n';
  }
  if (fit.draws.divergence_warning())
    txt << "WARNING: " << fit.draws.n_divergent()
        << " divergent transitions; do not trust these results\n";
  std::cout << "fit written to " << args.out_dir << " (" << fit.draws.size() << " draws)\n";
  if (fit.draws.divergence_warning())
    std::cerr << "warning: high divergence rate " << fit.draws.divergent_fraction() << '\n';
  return 0;
}

// Rebuild the model a saved fit was computed on.
DartModel model_for_fit(const DrawsFile& file, const LoadedData& loaded,
                        const ConfigFile& config, int threads) {
  ModelKind kind = file.layout.kind;
  int factors = file.layout.n_factors;
  Hyperparameters hyper;
  ModelOptions options;
  apply_model_config(config, &kind, &factors, &hyper, &options);
  options.unit_local_scales = file.layout.kind == ModelKind::kDart && !file.layout.has_phi;
  DartModel model(loaded.data, loaded.covariates, hyper, file.layout.kind,
                  file.layout.n_factors, options);
  if (model.layout().size != file.layout.size)
    throw std::runtime_error("saved draws do not match the data/model configuration");
  model.set_threads(threads);
  return model;
}

int run_predict(const GlobalArgs& args, const std::string& fit_dir, const std::string& data_arg) {
  const ConfigFile config = load_config_or_empty(args);
  const DrawsFile file = read_draws((fs::path(fit_dir) / "draws.csv").string());
  const LoadedData loaded = load_input_data(data_arg, config);
  const DartModel model = model_for_fit(file, loaded, config, args.threads);
  fs::create_directories(args.out_dir);
  const MeanEffect mean_s = posterior_mean_effect(model, file.draws);
  write_predictions_csv((fs::path(args.out_dir) / "predictions.csv").string(), mean_s,
                        loaded.data);
  write_manifest(args, config, "predict", 0);
  std::cout << "posterior mean surface written to " << args.out_dir << "/predictions.csv\n";
  if (!loaded.heldout.cells.empty()) {
    const auto [rmse, r2] = rmse_r2(effect_at_cells(mean_s, loaded.heldout.cells),
                                    replicate_means(loaded.heldout.cells));
    const double corr = effect_correlation(mean_s, loaded.heldout.cells);
    auto txt = csv::open_out((fs::path(args.out_dir) / "heldout_metrics.txt").string());
    txt << "held-out cells: " << loaded.heldout.cells.size() << '\n';
    txt << "rmse " << csv::format(rmse) << "\nr2 " << csv::format(r2) << "\ncorrelation "
        << csv::format(corr) << '\n';
    std::cout << "held-out rmse " << rmse << ", r2 " << r2 << ", correlation " << corr << '\n';
  }
  return 0;
}

int run_crossval(const GlobalArgs& args, const std::string& data_arg, std::string scheme,
                 int folds, double fraction) {
  const ConfigFile config = load_config_or_empty(args);
  if (scheme.empty()) scheme = config.get_string("crossval", "scheme", "pairs");
  if (folds == 0) folds = static_cast<int>(config.get_long("crossval", "folds", 5));
  if (fraction == 0.0) fraction = config.get_double("crossval", "fraction", 0.1);
  const std::uint64_t cv_seed =
      args.seed ? *args.seed
                : static_cast<std::uint64_t>(config.get_long("crossval", "seed", 0));
  const LoadedData loaded = load_input_data(data_arg, config);
  FitOptions options = make_fit_options(config, args);

  std::vector<std::pair<ObservationSet, ObservationSet>> splits;
  if (scheme == "pairs") {
    splits = split_pairs(loaded.data, folds, cv_seed);
  } else if (scheme == "dose-fold") {
    for (int f = 1; f <= folds; ++f) splits.push_back(split_dose_fold(loaded.data, f));
  } else if (scheme == "cells") {
    Rng rng(cv_seed);
    for (int f = 0; f < folds; ++f) {
      std::vector<std::size_t> idx;
      for (std::size_t c = 0; c < loaded.data.cells.size(); ++c)
        if (rng.uniform() < fraction) idx.push_back(c);
      splits.push_back(split_cells(loaded.data, idx));
    }
  } else {
    throw std::runtime_error("crossval scheme must be pairs, cells or dose-fold");
  }

  fs::create_directories(args.out_dir);
  auto out = csv::open_out((fs::path(args.out_dir) / "crossval.csv").string());
  out << "fold,n_train,n_heldout,in_rmse,in_r2,out_rmse,out_r2,out_corr,divergent_fraction\n";
  double sum_out_r2 = 0.0;
  int n_scored = 0;
  for (std::size_t f = 0; f < splits.size(); ++f) {
    const auto& [train, test] = splits[f];
    FitOptions fold_options = options;
    fold_options.sampler.seed = split_seed(options.sampler.seed, 100 + f);
    DartModel model(train, loaded.covariates, fold_options.hyper, fold_options.kind,
                    fold_options.n_factors, fold_options.model);
    model.set_threads(args.threads);
    const PosteriorDraws draws = run_chains(model, fold_options.sampler);
    const MeanEffect mean_s = posterior_mean_effect(model, draws);
    const auto [in_rmse, in_r2] =
        rmse_r2(effect_at_cells(mean_s, train.cells), replicate_means(train.cells));
    double out_rmse = std::numeric_limits<double>::quiet_NaN();
    double out_r2 = std::numeric_limits<double>::quiet_NaN();
    double out_corr = std::numeric_limits<double>::quiet_NaN();
    if (!test.cells.empty()) {
      std::tie(out_rmse, out_r2) =
          rmse_r2(effect_at_cells(mean_s, test.cells), replicate_means(test.cells));
      if (test.cells.size() >= 2) out_corr = effect_correlation(mean_s, test.cells);
    }
    out << (f + 1) << ',' << train.cells.size() << ',' << test.cells.size() << ','
        << csv::format(in_rmse) << ',' << csv::format(in_r2) << ',' << csv::format(out_rmse)
        << ',' << csv::format(out_r2) << ',' << csv::format(out_corr) << ','
        << csv::format(draws.divergent_fraction()) << '\n';
    if (std::isfinite(out_r2)) {
      sum_out_r2 += out_r2;
      ++n_scored;
    }
    std::cout << "fold " << (f + 1) << "/" << splits.size() << ": out_r2 " << out_r2 << '\n';
  }
  write_manifest(args, config, "crossval", cv_seed);
  if (n_scored > 0)
    std::cout << "mean out-of-sample r2 " << (sum_out_r2 / n_scored) << " over " << n_scored
              << " folds\n";
  return 0;
}

int run_benchmark(const GlobalArgs& args, const std::string& data_arg, std::string kinds_arg,
                  int folds) {
  const ConfigFile config = load_config_or_empty(args);
  if (kinds_arg.empty()) kinds_arg = config.get_string("benchmark", "kinds", "hill,exp5,power");
  if (folds == 0) folds = static_cast<int>(config.get_long("benchmark", "folds", 5));
  const LoadedData loaded = load_input_data(data_arg, config);
  std::vector<CurveKind> kinds;
  for (const auto& name : csv::split(kinds_arg)) kinds.push_back(curve_kind_from_name(name));
  const BenchmarkResult result = benchmark_crossval(loaded.data, kinds, folds);
  fs::create_directories(args.out_dir);
  write_benchmark_csv((fs::path(args.out_dir) / "benchmark.csv").string(), result, loaded.data);
  write_manifest(args, config, "benchmark", 0);
  for (const auto& s : result.folds)
    std::cout << curve_kind_name(s.kind) << " fold " << s.fold << ": " << s.n_pairs
              << " pairs, out_rmse " << s.out_rmse << ", pooled out_r2 " << s.out_r2 << '\n';
  return 0;
}

int run_diagnose(const GlobalArgs& args, const std::string& fit_dir, const std::string& data_arg) {
  const ConfigFile config = load_config_or_empty(args);
  const DrawsFile file = read_draws((fs::path(fit_dir) / "draws.csv").string());
  const PosteriorDraws& draws = file.draws;
  if (draws.size() == 0) throw std::runtime_error("no draws in " + fit_dir);
  fs::create_directories(args.out_dir);

  auto out = csv::open_out((fs::path(args.out_dir) / "diagnostics.csv").string());
  out << "parameter,mean,sd,rhat,ess_bulk,ess_tail\n";
  std::vector<double> values(draws.size());
  double worst_rhat = 0.0;
  std::string worst_name;
  for (int d = 0; d < draws.dim; ++d) {
    for (std::size_t s = 0; s < draws.size(); ++s) values[s] = draws.draws[s][d];
    const auto series = per_chain_series(draws, values);
    const double rhat = split_rhat(series);
    const double bulk = ess_bulk(series);
    const double tail = ess_tail(series);
    const double mean = stats::mean(values);
    const double sd = values.size() > 1 ? std::sqrt(stats::variance(values)) : 0.0;
    out << param_name(file.layout, d) << ',' << csv::format(mean) << ',' << csv::format(sd)
        << ',' << csv::format(rhat) << ',' << csv::format(bulk) << ',' << csv::format(tail)
        << '\n';
    if (std::isfinite(rhat) && rhat > worst_rhat) {
      worst_rhat = rhat;
      worst_name = param_name(file.layout, d);
    }
  }

  auto txt = csv::open_out((fs::path(args.out_dir) / "summary.txt").string());
  const auto lp_series = per_chain_series(draws, draws.log_post);
  txt << "draws " << draws.size() << ", parameters " << draws.dim << '\n';
  txt << "lp rhat " << csv::format(split_rhat(lp_series)) << ", ess_bulk "
      << csv::format(ess_bulk(lp_series)) << ", ess_tail " << csv::format(ess_tail(lp_series))
      << '\n';
  txt << "divergent " << draws.n_divergent() << " (" << csv::format(draws.divergent_fraction())
      << ")\n";
  if (!worst_name.empty())
    txt << "worst rhat " << csv::format(worst_rhat) << " at " << worst_name << '\n';
  if (draws.divergence_warning()) txt << "WARNING: divergence rate above 10%\n";

  // Full metric report when the data is available to recompute likelihoods.
  if (!data_arg.empty()) {
    const LoadedData loaded = load_input_data(data_arg, config);
    const DartModel model = model_for_fit(file, loaded, config, args.threads);
    const MetricReport report = evaluate_fit(
        model, draws, loaded.heldout.cells.empty() ? nullptr : &loaded.heldout);
    auto rep = csv::open_out((fs::path(args.out_dir) / "metrics.txt").string());
    rep << report.to_text();
  }
  write_manifest(args, config, "diagnose", 0);
  std::cout << "diagnostics written to " << args.out_dir << '\n';
  return 0;
}

int run_report(const GlobalArgs& args, const std::string& fit_dir, const std::string& data_arg,
               const std::string& exposure_path) {
  const ConfigFile config = load_config_or_empty(args);
  const DrawsFile file = read_draws((fs::path(fit_dir) / "draws.csv").string());
  const LoadedData loaded = load_input_data(data_arg, config);
  const DartModel model = model_for_fit(file, loaded, config, args.threads);
  fs::create_directories(args.out_dir);

  const MeanEffect mean_s = posterior_mean_effect(model, file.draws);
  write_predictions_csv((fs::path(args.out_dir) / "predictions.csv").string(), mean_s,
                        loaded.data);

  std::vector<double> exposure;
  if (!exposure_path.empty()) exposure = load_exposure(exposure_path, loaded.data);
  std::vector<ChemicalPriority> priorities =
      prioritize_chemicals(mean_s, loaded.data, exposure);
  const long top = config.get_long("report", "top", 0);
  if (top > 0 && static_cast<long>(priorities.size()) > top) priorities.resize(top);
  write_priorities_csv((fs::path(args.out_dir) / "priorities.csv").string(), priorities,
                       loaded.data.gene_ids);

  const MetricReport report = evaluate_fit(
      model, file.draws, loaded.heldout.cells.empty() ? nullptr : &loaded.heldout);
  auto txt = csv::open_out((fs::path(args.out_dir) / "report.txt").string());
  txt << report.to_text();
  write_manifest(args, config, "report", 0);
  std::cout << "report written to " << args.out_dir << " (" << priorities.size()
            << " prioritized chemicals)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian dose-response matrix completion for screening data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  GlobalArgs args;
  app.add_option("--config", args.config_path, "configuration file")->check(CLI::ExistingFile);
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "override the configured seed");
  app.add_option("--threads", args.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", args.out_dir, "output directory");

  std::string data_arg, fit_dir, scheme, kinds_arg, exposure_path;
  int folds = 0;
  double fraction = 0.0;

  auto* simulate = app.add_subcommand("simulate", "draw a synthetic dataset from the prior");
  auto* fit = app.add_subcommand("fit", "sample the posterior for a dataset");
  fit->add_option("--data", data_arg, "dataset directory or observations CSV");
  auto* predict = app.add_subcommand("predict", "posterior mean effect surface from a saved fit");
  predict->add_option("--fit", fit_dir, "fit output directory")->required();
  predict->add_option("--data", data_arg, "dataset the fit was computed on");
  auto* crossval = app.add_subcommand("crossval", "cross-validated fit quality");
  crossval->add_option("--data", data_arg, "dataset directory or observations CSV");
  crossval->add_option("--scheme", scheme, "pairs, cells or dose-fold");
  crossval->add_option("--folds", folds, "number of folds");
  crossval->add_option("--fraction", fraction, "held-out fraction for the cells scheme");
  auto* benchmark = app.add_subcommand("benchmark", "parametric curve baselines by dose holdout");
  benchmark->add_option("--data", data_arg, "dataset directory or observations CSV");
  benchmark->add_option("--kinds", kinds_arg, "comma-separated curve families");
  benchmark->add_option("--folds", folds, "number of dose-holdout folds");
  auto* diagnose = app.add_subcommand("diagnose", "convergence diagnostics for a saved fit");
  diagnose->add_option("--fit", fit_dir, "fit output directory")->required();
  diagnose->add_option("--data", data_arg, "dataset (enables WAIC / LOO metrics)");
  auto* report = app.add_subcommand("report", "activity calls and chemical prioritization");
  report->add_option("--fit", fit_dir, "fit output directory")->required();
  report->add_option("--data", data_arg, "dataset the fit was computed on")->required();
  report->add_option("--exposure", exposure_path, "chemical_id,exposure CSV for ranking");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (seed_opt->count() > 0) args.seed = seed_value;
  if (args.out_dir.empty()) args.out_dir = ".";

  try {
    if (simulate->parsed()) return run_simulate(args);
    if (fit->parsed()) return run_fit(args, data_arg);
    if (predict->parsed()) return run_predict(args, fit_dir, data_arg);
    if (crossval->parsed()) return run_crossval(args, data_arg, scheme, folds, fraction);
    if (benchmark->parsed()) return run_benchmark(args, data_arg, kinds_arg, folds);
    if (diagnose->parsed()) return run_diagnose(args, fit_dir, data_arg);
    if (report->parsed()) return run_report(args, fit_dir, data_arg, exposure_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
