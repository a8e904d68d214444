#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dart/align.hpp"
#include "dart/kernel.hpp"
#include "dart/model.hpp"
#include "dart/rng.hpp"
#include "test_helpers.hpp"

using namespace dart;

namespace {

Eigen::MatrixXd rotation2(double angle) {
  Eigen::MatrixXd r(2, 2);
  r << std::cos(angle), -std::sin(angle),
       std::sin(angle),  std::cos(angle);
  return r;
}

// Swap the two columns and flip the sign of one: an orthogonal transform the
// aligner must undo.
Eigen::MatrixXd swap_flip() {
  Eigen::MatrixXd p(2, 2);
  p <<  0.0, 1.0,
       -1.0, 0.0;
  return p;
}

// Two sharply separated loading columns over the flattened (gene, dose) rows
// so that the varimax optimum is unambiguous.
Eigen::MatrixXd sparse_target(int rows) {
  Eigen::MatrixXd flat(rows, 2);
  Rng rng(91);
  for (int r = 0; r < rows; ++r) {
    const bool first_half = r < rows / 2;
    flat(r, 0) = first_half ? 1.0 + rng.uniform() : 0.05 * rng.normal();
    flat(r, 1) = first_half ? 0.05 * rng.normal() : -1.5 - rng.uniform();
  }
  return flat;
}

struct AlignFixture {
  DoseGrid grid = simulation_dose_grid(3);
  Hyperparameters hyper;
  ParamLayout layout;
  LatentState base;

  explicit AlignFixture(ModelKind kind, int n_w = 0, int n_z = 0)
      : layout(make_layout(kind, 5, 2, 3, 2, n_w, n_z)) {
    Rng rng(120);
    base = testing::random_state(layout, rng);
    // Unit global, column and local scales make the natural loadings exactly
    // L * a, so an orthogonal transform of (a, eta) leaves the mean surface
    // untouched.
    base.log_delta.setZero();
    base.log_tau0 = 0.0;
    if (layout.has_phi) base.log_phi.setZero();
    const auto kernel = kernel_matrix(grid, hyper.length_scale);
    const Eigen::MatrixXd flat = sparse_target(layout.n_genes * layout.n_doses);
    for (int j = 0; j < layout.n_genes; ++j) {
      base.lambda_raw[j] = kernel.chol.triangularView<Eigen::Lower>().solve(
          flat.block(j * layout.n_doses, 0, layout.n_doses, 2));
    }
  }

  // Mean-effect surface (chems x flattened gene/dose) of a packed draw.
  Eigen::MatrixXd surface(const Eigen::VectorXd& x) const {
    const LatentState s = unpack_state(x, layout);
    const auto lam = loadings(s, grid, hyper);
    Eigen::MatrixXd flat(layout.n_genes * layout.n_doses, layout.n_factors);
    for (int j = 0; j < layout.n_genes; ++j)
      flat.middleRows(j * layout.n_doses, layout.n_doses) = lam[j];
    return s.eta * flat.transpose();
  }

  PosteriorDraws two_draws(const Eigen::MatrixXd& q, bool permute_beta = false) const {
    LatentState other = base;
    for (auto& a : other.lambda_raw) a = (a * q).eval();
    other.eta = (base.eta * q).eval();
    if (other.theta.rows() > 0) other.theta = (base.theta * q).eval();
    if (permute_beta && other.beta.rows() == 2) {
      other.beta.row(0) = base.beta.row(1);
      other.beta.row(1) = base.beta.row(0);
    }
    PosteriorDraws d;
    d.dim = layout.size;
    d.draws = {pack_state(base, layout), pack_state(other, layout)};
    d.log_post = {-10.0, -5.0};
    d.divergent = {0, 0};
    d.chain = {0, 0};
    d.chain_stats.resize(1);
    return d;
  }
};

}  // namespace

TEST_CASE("varimax criterion: hand value, symmetry, and loss under rotation") {
  CHECK(varimax_criterion(Eigen::MatrixXd::Identity(2, 2)) ==
        doctest::Approx(0.5).epsilon(1e-14));

  const Eigen::MatrixXd flat = sparse_target(12);
  CHECK(varimax_criterion(flat * swap_flip()) ==
        doctest::Approx(varimax_criterion(flat)).epsilon(1e-12));
  CHECK(varimax_criterion(flat * rotation2(0.6)) < varimax_criterion(flat));
}

TEST_CASE("varimax rotation is orthogonal and recovers a rotated sparse basis") {
  const Eigen::MatrixXd flat = sparse_target(12);
  const Eigen::MatrixXd mixed = flat * rotation2(0.7);

  const Eigen::MatrixXd r = varimax_rotation(mixed);
  CHECK((r.transpose() * r - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(varimax_criterion(mixed * r) >= varimax_criterion(mixed) - 1e-12);

  // Both starting points reach the same optimum value.
  const Eigen::MatrixXd r0 = varimax_rotation(flat);
  CHECK(varimax_criterion(mixed * r) ==
        doctest::Approx(varimax_criterion(flat * r0)).epsilon(1e-8));

  CHECK(varimax_rotation(Eigen::MatrixXd::Constant(4, 1, 2.0)) ==
        Eigen::MatrixXd::Identity(1, 1));
}

TEST_CASE("alignment undoes rotation, sign flips and permutations of the factors") {
  const AlignFixture fx(ModelKind::kDartNc);
  const Eigen::MatrixXd q = rotation2(0.4) * swap_flip();
  const PosteriorDraws d = fx.two_draws(q);

  const AlignedDraws aligned = match_align(d, fx.layout, fx.grid, fx.hyper, 0);
  CHECK(aligned.pivot == 0);
  REQUIRE(aligned.lambda.size() == 2);
  CHECK((aligned.lambda[1] - aligned.lambda[0]).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((aligned.eta[1] - aligned.eta[0]).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(aligned.theta[0].size() == 0);
  CHECK(aligned.beta[0].size() == 0);

  // The mean surface of every draw is exactly preserved by the alignment.
  for (int s = 0; s < 2; ++s) {
    const Eigen::MatrixXd before = fx.surface(d.draws[s]);
    const Eigen::MatrixXd after =
        aligned.eta[s] * aligned.lambda[s].transpose();
    CHECK((before - after).cwiseAbs().maxCoeff() < 1e-8);
  }

  const Eigen::MatrixXd lam_mean = aligned.lambda_mean();
  CHECK(lam_mean.rows() == fx.layout.n_genes * fx.layout.n_doses);
  CHECK(lam_mean.cols() == 2);
  CHECK((lam_mean - aligned.lambda[0]).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(aligned.eta_mean().rows() == fx.layout.n_chems);
}

TEST_CASE("alignment carries theta along and permutes beta rows without signs") {
  const AlignFixture fx(ModelKind::kDart, 2, 2);
  REQUIRE(fx.layout.has_phi);
  const PosteriorDraws d = fx.two_draws(swap_flip(), true);

  const AlignedDraws aligned = match_align(d, fx.layout, fx.grid, fx.hyper, 0);
  CHECK((aligned.lambda[1] - aligned.lambda[0]).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((aligned.eta[1] - aligned.eta[0]).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((aligned.theta[1] - aligned.theta[0]).cwiseAbs().maxCoeff() < 1e-6);
  // beta rows ride the permutation untouched by the sign flip.
  CHECK((aligned.beta[1] - aligned.beta[0]).cwiseAbs().maxCoeff() < 1e-12);

  // The descriptor-space surface eta * theta' is preserved as well.
  const LatentState s0 = unpack_state(d.draws[0], fx.layout);
  const Eigen::MatrixXd before = s0.eta * s0.theta.transpose();
  const Eigen::MatrixXd after = aligned.eta[1] * aligned.theta[1].transpose();
  CHECK((before - after).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("default pivot is the highest-posterior draw; bad inputs throw") {
  const AlignFixture fx(ModelKind::kDartNc);
  const PosteriorDraws d = fx.two_draws(rotation2(0.2));

  const AlignedDraws aligned = match_align(d, fx.layout, fx.grid, fx.hyper);
  CHECK(aligned.pivot == 1);  // log_post = {-10, -5}

  CHECK_THROWS_AS(match_align(d, fx.layout, fx.grid, fx.hyper, 7),
                  std::invalid_argument);
  PosteriorDraws empty;
  empty.dim = fx.layout.size;
  CHECK_THROWS_AS(match_align(empty, fx.layout, fx.grid, fx.hyper),
                  std::invalid_argument);
}
