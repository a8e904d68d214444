// Python bindings for the dose-response factor model: data containers,
// simulation, the posterior model with its sampler, and the evaluation
// toolkit. Enums travel as strings ("dart" / "dart-nc", "hill" / ...).

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "dart/align.hpp"
#include "dart/config.hpp"
#include "dart/curvefit.hpp"
#include "dart/diagnostics.hpp"
#include "dart/draws_io.hpp"
#include "dart/ingest.hpp"
#include "dart/kernel.hpp"
#include "dart/model.hpp"
#include "dart/pipeline.hpp"
#include "dart/sampler.hpp"
#include "dart/simulate.hpp"
#include "dart/state.hpp"
#include "dart/version.hpp"

namespace py = pybind11;
using namespace dart;

namespace {

Eigen::MatrixXd draws_matrix(const PosteriorDraws& draws) {
  Eigen::MatrixXd out(static_cast<long>(draws.size()), draws.dim);
  for (std::size_t s = 0; s < draws.size(); ++s) out.row(static_cast<long>(s)) = draws.draws[s];
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Covariate-informed Bayesian factor model for dose-response screens";
  m.attr("__version__") = kVersion;

  // --- grids and dose bins -------------------------------------------------
  py::class_<DoseGrid>(m, "DoseGrid")
      .def(py::init([](std::vector<double> coords) {
             DoseGrid g{std::move(coords)};
             g.validate();
             return g;
           }),
           py::arg("coords"))
      .def_readonly("coords", &DoseGrid::coords)
      .def("__len__", &DoseGrid::size);
  m.def("standard_dose_grid", &standard_dose_grid);
  m.def("simulation_dose_grid", &simulation_dose_grid, py::arg("n_doses"));

  py::class_<BinTable>(m, "BinTable")
      .def_static("standard", &BinTable::standard)
      .def("discretize",
           [](const BinTable& t, double dose_um) -> std::optional<double> {
             return t.discretize(dose_um);
           },
           py::arg("dose_um"), "Bin label for a micromolar dose, or None when out of range")
      .def("representative", &BinTable::representative, py::arg("label"),
           "Micromolar dose representing a bin label");

  py::class_<KernelCholesky>(m, "KernelCholesky")
      .def_readonly("cov", &KernelCholesky::cov)
      .def_readonly("chol", &KernelCholesky::chol)
      .def_readonly("half_log_det", &KernelCholesky::half_log_det);
  m.def("kernel_matrix", &kernel_matrix, py::arg("grid"), py::arg("length_scale"),
        py::arg("jitter") = 1e-8);

  // --- observations and covariates ------------------------------------------
  py::class_<ObservationCell>(m, "ObservationCell")
      .def(py::init([](int chem, int gene, int dose, std::vector<double> responses) {
             return ObservationCell{chem, gene, dose, std::move(responses)};
           }),
           py::arg("chem"), py::arg("gene"), py::arg("dose"), py::arg("responses"))
      .def_readonly("chem", &ObservationCell::chem)
      .def_readonly("gene", &ObservationCell::gene)
      .def_readonly("dose", &ObservationCell::dose)
      .def_readonly("responses", &ObservationCell::responses);

  py::class_<ObservationSet>(m, "ObservationSet")
      .def(py::init([](int n_chems, int n_genes, const DoseGrid& grid,
                       std::vector<ObservationCell> cells) {
             ObservationSet data;
             data.n_chems = n_chems;
             data.n_genes = n_genes;
             data.grid = grid;
             data.cells = std::move(cells);
             data.finalize();
             return data;
           }),
           py::arg("n_chems"), py::arg("n_genes"), py::arg("grid"), py::arg("cells"))
      .def_readonly("n_chems", &ObservationSet::n_chems)
      .def_readonly("n_genes", &ObservationSet::n_genes)
      .def_readonly("grid", &ObservationSet::grid)
      .def_readonly("cells", &ObservationSet::cells)
      .def_readonly("chem_ids", &ObservationSet::chem_ids)
      .def_readonly("gene_ids", &ObservationSet::gene_ids)
      .def("total_responses", &ObservationSet::total_responses)
      .def("mean_dose_coord", &ObservationSet::mean_dose_coord);

  py::class_<CovariateSet>(m, "CovariateSet")
      .def(py::init([](const Eigen::MatrixXd& w, const Eigen::MatrixXd& z) {
             CovariateSet cov;
             cov.w = w;
             cov.z = z;
             return cov;
           }),
           py::arg("w") = Eigen::MatrixXd(), py::arg("z") = Eigen::MatrixXd())
      .def_readwrite("w", &CovariateSet::w)
      .def_readwrite("z", &CovariateSet::z)
      .def_readwrite("w_names", &CovariateSet::w_names)
      .def_readwrite("z_names", &CovariateSet::z_names);

  py::class_<MeanEffect>(m, "MeanEffect")
      .def_readonly("n_chems", &MeanEffect::n_chems)
      .def_readonly("n_genes", &MeanEffect::n_genes)
      .def_readonly("n_doses", &MeanEffect::n_doses)
      .def_readonly("by_gene", &MeanEffect::by_gene)
      .def("value",
           [](const MeanEffect& e, int chem, int gene, int dose) { return e(chem, gene, dose); },
           py::arg("chem"), py::arg("gene"), py::arg("dose"));

  // --- priors ---------------------------------------------------------------
  py::class_<Hyperparameters>(m, "Hyperparameters")
      .def(py::init<>())
      .def_readwrite("length_scale", &Hyperparameters::length_scale)
      .def_readwrite("mgp_a1", &Hyperparameters::mgp_a1)
      .def_readwrite("mgp_b1", &Hyperparameters::mgp_b1)
      .def_readwrite("mgp_a2", &Hyperparameters::mgp_a2)
      .def_readwrite("mgp_b2", &Hyperparameters::mgp_b2)
      .def_property(
          "tau0_prior",
          [](const Hyperparameters& h) {
            return h.tau0_prior == Tau0Prior::kGamma ? "gamma" : "inverse-gamma";
          },
          [](Hyperparameters& h, const std::string& name) {
            if (name == "gamma")
              h.tau0_prior = Tau0Prior::kGamma;
            else if (name == "inverse-gamma")
              h.tau0_prior = Tau0Prior::kInverseGamma;
            else
              throw std::invalid_argument("tau0_prior must be gamma or inverse-gamma");
          })
      .def_readwrite("tau0_a", &Hyperparameters::tau0_a)
      .def_readwrite("tau0_b", &Hyperparameters::tau0_b)
      .def_readwrite("sigma_phi", &Hyperparameters::sigma_phi)
      .def_readwrite("sigma_beta", &Hyperparameters::sigma_beta)
      .def_readwrite("sigma_eta", &Hyperparameters::sigma_eta)
      .def_readwrite("sigma_w", &Hyperparameters::sigma_w)
      .def_readwrite("sigma_theta", &Hyperparameters::sigma_theta)
      .def_readwrite("alpha_noise_mean", &Hyperparameters::alpha_noise_mean)
      .def_readwrite("alpha_noise_sd", &Hyperparameters::alpha_noise_sd)
      .def_readwrite("beta_noise_mean", &Hyperparameters::beta_noise_mean)
      .def_readwrite("beta_noise_sd", &Hyperparameters::beta_noise_sd)
      .def_readwrite("tau_gamma_scale", &Hyperparameters::tau_gamma_scale)
      .def("validate", &Hyperparameters::validate);
  m.def("pfas_preset", &pfas_preset);

  py::class_<ModelOptions>(m, "ModelOptions")
      .def(py::init<>())
      .def_readwrite("unit_local_scales", &ModelOptions::unit_local_scales)
      .def_readwrite("kernel_jitter", &ModelOptions::kernel_jitter);

  // --- layout and model -------------------------------------------------------
  py::class_<ParamLayout>(m, "ParamLayout")
      .def_property_readonly("kind",
                             [](const ParamLayout& l) { return model_kind_name(l.kind); })
      .def_readonly("n_chems", &ParamLayout::n_chems)
      .def_readonly("n_genes", &ParamLayout::n_genes)
      .def_readonly("n_doses", &ParamLayout::n_doses)
      .def_readonly("n_factors", &ParamLayout::n_factors)
      .def_readonly("n_w", &ParamLayout::n_w)
      .def_readonly("n_z", &ParamLayout::n_z)
      .def_readonly("has_phi", &ParamLayout::has_phi)
      .def_readonly("size", &ParamLayout::size)
      .def("param_name", [](const ParamLayout& l, int i) { return param_name(l, i); },
           py::arg("index"));

  py::class_<DartModel>(m, "DartModel")
      .def(py::init([](const ObservationSet& data, const CovariateSet& covariates,
                       const Hyperparameters& hyper, const std::string& kind, int n_factors,
                       const ModelOptions& options) {
             return DartModel(data, covariates, hyper, model_kind_from_name(kind), n_factors,
                              options);
           }),
           py::arg("data"), py::arg("covariates") = CovariateSet{},
           py::arg("hyper") = Hyperparameters{}, py::arg("kind") = "dart",
           py::arg("n_factors") = 5, py::arg("options") = ModelOptions{})
      .def("dim", &DartModel::dim)
      .def("log_density",
           [](const DartModel& model, const Eigen::VectorXd& x) {
             return model.log_density_gradient(x, nullptr);
           },
           py::arg("x"))
      .def("log_density_gradient",
           [](const DartModel& model, const Eigen::VectorXd& x) {
             Eigen::VectorXd grad(model.dim());
             const double value = model.log_density_gradient(x, &grad);
             return py::make_tuple(value, grad);
           },
           py::arg("x"))
      .def("log_likelihood_at", &DartModel::log_likelihood_at, py::arg("x"))
      .def("log_prior_at", &DartModel::log_prior_at, py::arg("x"))
      .def("pointwise_loglik", &DartModel::pointwise_loglik, py::arg("x"))
      .def("mean_effect_at", &DartModel::mean_effect_at, py::arg("x"))
      .def("dose_coord_mean", &DartModel::dose_coord_mean)
      .def_property_readonly("layout", &DartModel::layout,
                             py::return_value_policy::reference_internal)
      .def_property_readonly("data", &DartModel::data,
                             py::return_value_policy::reference_internal);

  // --- sampler -----------------------------------------------------------------
  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init([](int chains, int warmup, int samples, int thin, double target_accept,
                       int max_tree_depth, double init_scale, std::uint64_t seed, int threads) {
             SamplerConfig c;
             c.chains = chains;
             c.warmup = warmup;
             c.samples = samples;
             c.thin = thin;
             c.target_accept = target_accept;
             c.max_tree_depth = max_tree_depth;
             c.init_scale = init_scale;
             c.seed = seed;
             c.threads = threads;
             return c;
           }),
           py::arg("chains") = 1, py::arg("warmup") = 1000, py::arg("samples") = 1000,
           py::arg("thin") = 1, py::arg("target_accept") = 0.8, py::arg("max_tree_depth") = 10,
           py::arg("init_scale") = 0.1, py::arg("seed") = 0, py::arg("threads") = 1)
      .def_readwrite("chains", &SamplerConfig::chains)
      .def_readwrite("warmup", &SamplerConfig::warmup)
      .def_readwrite("samples", &SamplerConfig::samples)
      .def_readwrite("thin", &SamplerConfig::thin)
      .def_readwrite("target_accept", &SamplerConfig::target_accept)
      .def_readwrite("max_tree_depth", &SamplerConfig::max_tree_depth)
      .def_readwrite("init_scale", &SamplerConfig::init_scale)
      .def_readwrite("seed", &SamplerConfig::seed)
      .def_readwrite("threads", &SamplerConfig::threads);

  py::class_<ChainStats>(m, "ChainStats")
      .def_readonly("seed", &ChainStats::seed)
      .def_readonly("step_size", &ChainStats::step_size)
      .def_readonly("mean_accept", &ChainStats::mean_accept)
      .def_readonly("divergences", &ChainStats::divergences)
      .def_readonly("max_depth_hits", &ChainStats::max_depth_hits)
      .def_readonly("inv_mass", &ChainStats::inv_mass);

  py::class_<PosteriorDraws>(m, "PosteriorDraws")
      .def_readonly("dim", &PosteriorDraws::dim)
      .def_readonly("log_post", &PosteriorDraws::log_post)
      .def_readonly("divergent", &PosteriorDraws::divergent)
      .def_readonly("chain", &PosteriorDraws::chain)
      .def_readonly("chain_stats", &PosteriorDraws::chain_stats)
      .def("__len__", &PosteriorDraws::size)
      .def("matrix", &draws_matrix, "All draws stacked into a (draws, dim) matrix")
      .def("draw", [](const PosteriorDraws& d, std::size_t s) { return d.draws.at(s); },
           py::arg("index"))
      .def("n_divergent", &PosteriorDraws::n_divergent)
      .def("divergent_fraction", &PosteriorDraws::divergent_fraction)
      .def("divergence_warning", &PosteriorDraws::divergence_warning);

  m.def("sample",
        [](const DartModel& model, const SamplerConfig& config) {
          return run_chains(model, config);
        },
        py::arg("model"), py::arg("config"),
        "Run the configured number of NUTS chains for a model's posterior",
        py::call_guard<py::gil_scoped_release>());

  // --- simulation -----------------------------------------------------------------
  py::class_<SimulationConfig>(m, "SimulationConfig")
      .def(py::init([](int n_chems, int n_genes, int n_doses, int n_factors, int replicates,
                       int n_w, int n_z, double pi_miss, double z_prevalence, std::uint64_t seed,
                       const std::string& kind, const Hyperparameters& hyper) {
             SimulationConfig c;
             c.n_chems = n_chems;
             c.n_genes = n_genes;
             c.n_doses = n_doses;
             c.n_factors = n_factors;
             c.replicates = replicates;
             c.n_w = n_w;
             c.n_z = n_z;
             c.pi_miss = pi_miss;
             c.z_prevalence = z_prevalence;
             c.seed = seed;
             c.kind = model_kind_from_name(kind);
             c.hyper = hyper;
             return c;
           }),
           py::arg("n_chems") = 20, py::arg("n_genes") = 20, py::arg("n_doses") = 5,
           py::arg("n_factors") = 5, py::arg("replicates") = 3, py::arg("n_w") = 0,
           py::arg("n_z") = 0, py::arg("pi_miss") = 0.0, py::arg("z_prevalence") = 0.1,
           py::arg("seed") = 0, py::arg("kind") = "dart",
           py::arg("hyper") = Hyperparameters{})
      .def_readwrite("n_chems", &SimulationConfig::n_chems)
      .def_readwrite("n_genes", &SimulationConfig::n_genes)
      .def_readwrite("n_doses", &SimulationConfig::n_doses)
      .def_readwrite("n_factors", &SimulationConfig::n_factors)
      .def_readwrite("replicates", &SimulationConfig::replicates)
      .def_readwrite("n_w", &SimulationConfig::n_w)
      .def_readwrite("n_z", &SimulationConfig::n_z)
      .def_readwrite("pi_miss", &SimulationConfig::pi_miss)
      .def_readwrite("z_prevalence", &SimulationConfig::z_prevalence)
      .def_readwrite("seed", &SimulationConfig::seed)
      .def_property(
          "kind", [](const SimulationConfig& c) { return model_kind_name(c.kind); },
          [](SimulationConfig& c, const std::string& name) {
            c.kind = model_kind_from_name(name);
          })
      .def_readwrite("hyper", &SimulationConfig::hyper);

  py::class_<SyntheticDataset>(m, "SyntheticDataset")
      .def_readonly("data", &SyntheticDataset::data)
      .def_readonly("heldout", &SyntheticDataset::heldout)
      .def_readonly("covariates", &SyntheticDataset::covariates)
      .def_readonly("truth", &SyntheticDataset::truth)
      .def_readonly("mask", &SyntheticDataset::mask)
      .def_readonly("true_layout", &SyntheticDataset::true_layout)
      .def_property_readonly("true_params", [](const SyntheticDataset& ds) {
        return pack_state(ds.true_state, ds.true_layout);
      });

  m.def("simulate_dataset", &simulate_dataset, py::arg("config"));
  m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("dir"));
  m.def("load_dataset", &load_dataset, py::arg("dir"));

  // --- fitting and evaluation ---------------------------------------------------
  py::class_<FitOptions>(m, "FitOptions")
      .def(py::init([](const std::string& kind, int n_factors, const Hyperparameters& hyper,
                       const ModelOptions& model, const SamplerConfig& sampler) {
             FitOptions o;
             o.kind = model_kind_from_name(kind);
             o.n_factors = n_factors;
             o.hyper = hyper;
             o.model = model;
             o.sampler = sampler;
             return o;
           }),
           py::arg("kind") = "dart", py::arg("n_factors") = 5,
           py::arg("hyper") = Hyperparameters{}, py::arg("model") = ModelOptions{},
           py::arg("sampler") = SamplerConfig{})
      .def_property(
          "kind", [](const FitOptions& o) { return model_kind_name(o.kind); },
          [](FitOptions& o, const std::string& name) { o.kind = model_kind_from_name(name); })
      .def_readwrite("n_factors", &FitOptions::n_factors)
      .def_readwrite("hyper", &FitOptions::hyper)
      .def_readwrite("model", &FitOptions::model)
      .def_readwrite("sampler", &FitOptions::sampler);

  py::class_<DartFit>(m, "DartFit")
      .def_readonly("layout", &DartFit::layout)
      .def_readonly("grid", &DartFit::grid)
      .def_readonly("draws", &DartFit::draws);

  m.def("fit_dart", &fit_dart, py::arg("data"), py::arg("covariates") = CovariateSet{},
        py::arg("options") = FitOptions{}, py::call_guard<py::gil_scoped_release>());

  m.def("posterior_mean_effect", &posterior_mean_effect, py::arg("model"), py::arg("draws"));
  m.def("effect_at_cells", &effect_at_cells, py::arg("effect"), py::arg("cells"));
  m.def("replicate_means", &replicate_means, py::arg("cells"));
  m.def("effect_correlation", &effect_correlation, py::arg("effect"), py::arg("cells"));
  m.def("pointwise_loglik_matrix", &pointwise_loglik_matrix, py::arg("model"), py::arg("draws"));

  py::class_<CoverageBin>(m, "CoverageBin")
      .def_readonly("abs_mean_lo", &CoverageBin::abs_mean_lo)
      .def_readonly("abs_mean_hi", &CoverageBin::abs_mean_hi)
      .def_readonly("n", &CoverageBin::n)
      .def_readonly("covered", &CoverageBin::covered)
      .def("rate", &CoverageBin::rate);
  py::class_<CoverageResult>(m, "CoverageResult")
      .def_readonly("n", &CoverageResult::n)
      .def_readonly("covered", &CoverageResult::covered)
      .def_readonly("overall", &CoverageResult::overall)
      .def_readonly("bins", &CoverageResult::bins);

  py::class_<MetricReport>(m, "MetricReport")
      .def_readonly("waic", &MetricReport::waic)
      .def_readonly("waic_se", &MetricReport::waic_se)
      .def_readonly("p_waic", &MetricReport::p_waic)
      .def_readonly("loo_elpd", &MetricReport::loo_elpd)
      .def_readonly("loo_se", &MetricReport::loo_se)
      .def_readonly("loo_high_k", &MetricReport::loo_high_k)
      .def_readonly("mean_crps", &MetricReport::mean_crps)
      .def_readonly("coverage", &MetricReport::coverage)
      .def_readonly("in_rmse", &MetricReport::in_rmse)
      .def_readonly("in_r2", &MetricReport::in_r2)
      .def_readonly("out_rmse", &MetricReport::out_rmse)
      .def_readonly("out_r2", &MetricReport::out_r2)
      .def_readonly("lp_rhat", &MetricReport::lp_rhat)
      .def_readonly("lp_ess_bulk", &MetricReport::lp_ess_bulk)
      .def_readonly("lp_ess_tail", &MetricReport::lp_ess_tail)
      .def_readonly("max_param_rhat", &MetricReport::max_param_rhat)
      .def("to_text", &MetricReport::to_text);

  m.def("evaluate_fit",
        [](const DartModel& model, const PosteriorDraws& draws,
           const std::optional<ObservationSet>& heldout, std::uint64_t predictive_seed) {
          return evaluate_fit(model, draws, heldout ? &*heldout : nullptr, predictive_seed);
        },
        py::arg("model"), py::arg("draws"), py::arg("heldout") = std::nullopt,
        py::arg("predictive_seed") = 7);

  // --- information criteria and convergence metrics ---------------------------------
  py::class_<WaicResult>(m, "WaicResult")
      .def_readonly("elpd", &WaicResult::elpd)
      .def_readonly("p_eff", &WaicResult::p_eff)
      .def_readonly("waic", &WaicResult::waic)
      .def_readonly("se", &WaicResult::se)
      .def_readonly("pointwise_elpd", &WaicResult::pointwise_elpd);
  py::class_<PsisLooResult>(m, "PsisLooResult")
      .def_readonly("elpd", &PsisLooResult::elpd)
      .def_readonly("se", &PsisLooResult::se)
      .def_readonly("pointwise_elpd", &PsisLooResult::pointwise_elpd)
      .def_readonly("pareto_k", &PsisLooResult::pareto_k)
      .def_readonly("n_high_k", &PsisLooResult::n_high_k);
  m.def("waic", &waic, py::arg("loglik"),
        "WAIC from a (draws, cells) pointwise log-likelihood matrix");
  m.def("psis_loo", &psis_loo, py::arg("loglik"),
        "Pareto-smoothed importance-sampling LOO from a (draws, cells) matrix");
  m.def("crps", &crps, py::arg("samples"), py::arg("y"));
  m.def("split_rhat", &split_rhat, py::arg("chains"));
  m.def("ess_bulk", &ess_bulk, py::arg("chains"));
  m.def("ess_tail", &ess_tail, py::arg("chains"));
  m.def("rmse_r2", &rmse_r2, py::arg("predicted"), py::arg("observed"));

  // --- parametric curves -----------------------------------------------------------
  py::class_<ParametricFit>(m, "ParametricFit")
      .def_property_readonly("kind",
                             [](const ParametricFit& f) { return curve_kind_name(f.kind); })
      .def_readonly("top", &ParametricFit::top)
      .def_readonly("ac50", &ParametricFit::ac50)
      .def_readonly("power", &ParametricFit::power)
      .def_readonly("sse", &ParametricFit::sse)
      .def_readonly("converged", &ParametricFit::converged)
      .def_readonly("iterations", &ParametricFit::iterations)
      .def("evaluate", &ParametricFit::evaluate, py::arg("x"));
  m.def("hill_response", &hill_response, py::arg("x"), py::arg("top"), py::arg("ac50"),
        py::arg("power"));
  m.def("exp5_response", &exp5_response, py::arg("x"), py::arg("top"), py::arg("ac50"),
        py::arg("power"));
  m.def("power_response", &power_response, py::arg("x"), py::arg("scale"), py::arg("power"));
  m.def("fit_curve",
        [](const std::vector<double>& x, const std::vector<double>& y, const std::string& kind) {
          return fit_curve(x, y, curve_kind_from_name(kind));
        },
        py::arg("x"), py::arg("y"), py::arg("kind"));

  // --- alignment and descriptors ------------------------------------------------------
  py::class_<AlignedDraws>(m, "AlignedDraws")
      .def_readonly("pivot", &AlignedDraws::pivot)
      .def_readonly("lambda_", &AlignedDraws::lambda)
      .def_readonly("eta", &AlignedDraws::eta)
      .def_readonly("theta", &AlignedDraws::theta)
      .def_readonly("beta", &AlignedDraws::beta)
      .def("lambda_mean", &AlignedDraws::lambda_mean)
      .def("eta_mean", &AlignedDraws::eta_mean);
  m.def("varimax_criterion", &varimax_criterion, py::arg("a"));
  m.def("varimax_rotation", &varimax_rotation, py::arg("a"), py::arg("max_sweeps") = 200,
        py::arg("tol") = 1e-12);
  m.def("match_align",
        [](const PosteriorDraws& draws, const ParamLayout& layout, const DoseGrid& grid,
           const Hyperparameters& hyper, std::optional<std::size_t> pivot) {
          return pivot ? match_align(draws, layout, grid, hyper, *pivot)
                       : match_align(draws, layout, grid, hyper);
        },
        py::arg("draws"), py::arg("layout"), py::arg("grid"),
        py::arg("hyper") = Hyperparameters{}, py::arg("pivot") = std::nullopt);

  py::class_<PcaResult>(m, "PcaResult")
      .def_readonly("scores", &PcaResult::scores)
      .def_readonly("loadings", &PcaResult::loadings)
      .def_readonly("explained", &PcaResult::explained);
  m.def("pca_reduce", &pca_reduce, py::arg("x"), py::arg("n_components"));

  // --- draws persistence ----------------------------------------------------------------
  py::class_<DrawsFile>(m, "DrawsFile")
      .def_readonly("layout", &DrawsFile::layout)
      .def_readonly("grid", &DrawsFile::grid)
      .def_readonly("draws", &DrawsFile::draws);
  m.def("write_draws", &write_draws, py::arg("path"), py::arg("draws"), py::arg("layout"),
        py::arg("grid"));
  m.def("read_draws", &read_draws, py::arg("path"));
}
