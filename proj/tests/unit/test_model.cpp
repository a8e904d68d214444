#include <doctest.h>

#include <cmath>

#include "dart/model.hpp"
#include "test_helpers.hpp"

using namespace dart;

namespace {

struct Instance {
  ObservationSet data;
  CovariateSet cov;
  Hyperparameters hyper;
  ModelKind kind;
  int n_factors;
};

Instance make_instance(ModelKind kind, std::uint64_t seed, int n_w, int n_z,
                       double keep_prob = 0.8) {
  Rng rng(seed);
  Instance inst;
  inst.kind = kind;
  inst.n_factors = 2;
  inst.data = testing::random_observations(3, 3, simulation_dose_grid(4), 2, rng, keep_prob);
  inst.cov = testing::random_covariates(3, 3, n_w, n_z, rng);
  return inst;
}

}  // namespace

TEST_CASE("column shrinkage is the running product of delta reciprocals") {
  Eigen::VectorXd delta(3);
  delta << 2.0, 4.0, 0.5;
  const Eigen::VectorXd g = mgp_column_scales(delta);
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[1] == doctest::Approx(0.125));
  CHECK(g[2] == doctest::Approx(0.25));
}

TEST_CASE("noise variance follows the log-linear dose trend") {
  const double alpha = std::log(0.15);
  CHECK(noise_variance(alpha, 0.0, 0.0, 2.0, 2.0) == doctest::Approx(0.15));
  // gamma_j a 0.2 and a dose two above the center with slope 0.1:
  CHECK(noise_variance(alpha, 0.2, 0.1, 4.0, 2.0) ==
        doctest::Approx(0.15 * std::exp(0.2 + 0.2)));
  CHECK(noise_variance(alpha, -0.1, 0.05, 0.0, 2.0) ==
        doctest::Approx(0.15 * std::exp(-0.1 - 0.1)));
}

TEST_CASE("model density equals the standalone likelihood plus prior") {
  for (const auto& [kind, n_w, n_z] :
       {std::tuple{ModelKind::kDart, 2, 3}, std::tuple{ModelKind::kDartNc, 0, 0}}) {
    const Instance inst = make_instance(kind, 17, n_w, n_z);
    DartModel model(inst.data, inst.cov, inst.hyper, kind, inst.n_factors);
    Rng rng(99);
    const LatentState s = testing::random_state(model.layout(), rng);
    const Eigen::VectorXd x = pack_state(s, model.layout());

    const double ll = log_likelihood(s, inst.data, inst.hyper);
    const double lp = log_prior(s, inst.cov, inst.data.grid, inst.hyper, kind);
    const double joint = model.log_density_gradient(x, nullptr);
    CHECK(joint == doctest::Approx(ll + lp).epsilon(1e-12));
    CHECK(model.log_likelihood_at(x) == doctest::Approx(ll).epsilon(1e-12));
    CHECK(model.log_prior_at(x) == doctest::Approx(lp).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  for (const auto& [kind, n_w, n_z] :
       {std::tuple{ModelKind::kDart, 2, 2}, std::tuple{ModelKind::kDartNc, 0, 0}}) {
    const Instance inst = make_instance(kind, 23, n_w, n_z);
    DartModel model(inst.data, inst.cov, inst.hyper, kind, inst.n_factors);
    Rng rng(7);
    const LatentState s = testing::random_state(model.layout(), rng);
    Eigen::VectorXd x = pack_state(s, model.layout());
    Eigen::VectorXd grad(model.dim());
    model.log_density_gradient(x, &grad);

    const double h = 1e-5;
    for (int i = 0; i < model.dim(); ++i) {
      const double keep = x[i];
      x[i] = keep + h;
      const double up = model.log_density_gradient(x, nullptr);
      x[i] = keep - h;
      const double down = model.log_density_gradient(x, nullptr);
      x[i] = keep;
      const double fd = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(grad[i]), std::abs(fd), 1e-3});
      CHECK_MESSAGE(std::abs(grad[i] - fd) / denom < 1e-5,
                    "param ", param_name(model.layout(), i), " grad ", grad[i], " fd ", fd);
    }
  }
}

TEST_CASE("covariate model with unit local scales collapses to the no-covariate model") {
  Instance inst = make_instance(ModelKind::kDartNc, 41, 0, 0);
  // Make the collapse non-trivial: a non-default eta scale must carry over.
  inst.hyper.sigma_eta = 1.7;
  DartModel nc(inst.data, inst.cov, inst.hyper, ModelKind::kDartNc, inst.n_factors);
  ModelOptions unit;
  unit.unit_local_scales = true;
  DartModel dart(inst.data, inst.cov, inst.hyper, ModelKind::kDart, inst.n_factors, unit);
  REQUIRE(nc.dim() == dart.dim());

  Rng rng(5);
  const LatentState s = testing::random_state(nc.layout(), rng);
  const Eigen::VectorXd x = pack_state(s, nc.layout());
  Eigen::VectorXd g_nc(nc.dim()), g_dart(dart.dim());
  const double v_nc = nc.log_density_gradient(x, &g_nc);
  const double v_dart = dart.log_density_gradient(x, &g_dart);
  CHECK(v_nc == doctest::Approx(v_dart).epsilon(1e-13));
  CHECK((g_nc - g_dart).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pointwise log likelihoods sum to the total") {
  const Instance inst = make_instance(ModelKind::kDart, 53, 2, 2);
  DartModel model(inst.data, inst.cov, inst.hyper, inst.kind, inst.n_factors);
  Rng rng(3);
  const Eigen::VectorXd x = pack_state(testing::random_state(model.layout(), rng),
                                       model.layout());
  const Eigen::VectorXd pw = model.pointwise_loglik(x);
  REQUIRE(pw.size() == static_cast<Eigen::Index>(inst.data.cells.size()));
  CHECK(pw.sum() == doctest::Approx(model.log_likelihood_at(x)).epsilon(1e-12));
}

TEST_CASE("predictive parameters reproduce the likelihood cell by cell") {
  const Instance inst = make_instance(ModelKind::kDartNc, 61, 0, 0);
  DartModel model(inst.data, inst.cov, inst.hyper, inst.kind, inst.n_factors);
  Rng rng(13);
  const Eigen::VectorXd x = pack_state(testing::random_state(model.layout(), rng),
                                       model.layout());
  Eigen::VectorXd mean, var;
  model.predictive_params(x, &mean, &var);
  const Eigen::VectorXd pw = model.pointwise_loglik(x);
  for (std::size_t c = 0; c < inst.data.cells.size(); ++c) {
    double ll = 0.0;
    for (const double y : inst.data.cells[c].responses) {
      const double r = y - mean[c];
      ll += -0.5 * std::log(2.0 * M_PI * var[c]) - 0.5 * r * r / var[c];
    }
    CHECK(pw[c] == doctest::Approx(ll).epsilon(1e-12));
  }
}

TEST_CASE("gradient is bit-identical for any thread count") {
  const Instance inst = make_instance(ModelKind::kDart, 71, 2, 3, 0.9);
  DartModel model(inst.data, inst.cov, inst.hyper, inst.kind, inst.n_factors);
  Rng rng(21);
  const Eigen::VectorXd x = pack_state(testing::random_state(model.layout(), rng),
                                       model.layout());
  Eigen::VectorXd g1(model.dim());
  model.log_density_gradient(x, &g1);
  for (const int threads : {2, 3, 8}) {
    model.set_threads(threads);
    Eigen::VectorXd gn(model.dim());
    const double v = model.log_density_gradient(x, &gn);
    model.set_threads(1);
    const double v1 = model.log_density_gradient(x, &g1);
    CHECK(v == v1);
    CHECK((gn - g1).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("mean effect matches a direct reconstruction") {
  const Instance inst = make_instance(ModelKind::kDartNc, 83, 0, 0);
  DartModel model(inst.data, inst.cov, inst.hyper, inst.kind, inst.n_factors);
  Rng rng(17);
  const LatentState s = testing::random_state(model.layout(), rng);
  const MeanEffect eff = mean_effect(s, inst.data.grid, inst.hyper);
  const std::vector<Eigen::MatrixXd> lam = loadings(s, inst.data.grid, inst.hyper);
  for (int j = 0; j < inst.data.n_genes; ++j) {
    for (int i = 0; i < inst.data.n_chems; ++i) {
      for (int d = 0; d < inst.data.grid.size(); ++d) {
        const double direct = s.mu(j, d) + lam[j].row(d).dot(s.eta.row(i));
        CHECK(eff(i, j, d) == doctest::Approx(direct).epsilon(1e-12));
      }
    }
  }
  // The model's accessor agrees with the free function.
  const Eigen::VectorXd x = pack_state(s, model.layout());
  const MeanEffect via_model = model.mean_effect_at(x);
  for (int j = 0; j < inst.data.n_genes; ++j)
    CHECK((via_model.by_gene[j] - eff.by_gene[j]).cwiseAbs().maxCoeff() < 1e-12);
}
