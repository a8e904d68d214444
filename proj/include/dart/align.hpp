#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "dart/grid.hpp"
#include "dart/hyper.hpp"
#include "dart/sampler.hpp"
#include "dart/state.hpp"

namespace dart {

// Varimax criterion: sum over columns of the variance of squared loadings.
double varimax_criterion(const Eigen::MatrixXd& a);

// Orthogonal K x K rotation maximizing the varimax criterion of a * R,
// found by Kaiser's pairwise column sweeps.
Eigen::MatrixXd varimax_rotation(const Eigen::MatrixXd& a, int max_sweeps = 200,
                                 double tol = 1e-12);

// Per-draw factor blocks after resolving rotation, permutation and sign
// indeterminacy against a varimax-rotated pivot draw. lambda[s] stacks the
// gene loading matrices row-wise ((M*D) x K, row j*D + d). beta rows are
// re-indexed by the matched permutation only (signs do not act on it).
struct AlignedDraws {
  std::size_t pivot = 0;
  std::vector<Eigen::MatrixXd> lambda;
  std::vector<Eigen::MatrixXd> eta;    // N x K
  std::vector<Eigen::MatrixXd> theta;  // P x K; 0x0 when absent
  std::vector<Eigen::MatrixXd> beta;   // K x Q; 0x0 when absent

  Eigen::MatrixXd lambda_mean() const;
  Eigen::MatrixXd eta_mean() const;
};

// Aligns every draw to the given pivot: each draw is varimax-rotated, then
// its columns are greedily matched (by absolute inner product) and
// sign-fixed against the rotated pivot. eta and theta get the same
// orthogonal transform as the loadings, so eta * lambda' is unchanged.
AlignedDraws match_align(const PosteriorDraws& draws, const ParamLayout& layout,
                         const DoseGrid& grid, const Hyperparameters& hyper,
                         std::size_t pivot_index);

// Pivot defaults to the highest-posterior draw.
AlignedDraws match_align(const PosteriorDraws& draws, const ParamLayout& layout,
                         const DoseGrid& grid, const Hyperparameters& hyper);

}  // namespace dart
