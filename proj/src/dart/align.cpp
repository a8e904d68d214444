#include "dart/align.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dart/model.hpp"

namespace dart {

double varimax_criterion(const Eigen::MatrixXd& a) {
  const double p = static_cast<double>(a.rows());
  double v = 0.0;
  for (int k = 0; k < a.cols(); ++k) {
    const Eigen::ArrayXd sq = a.col(k).array().square();
    const double m2 = sq.sum() / p;
    v += sq.square().sum() / p - m2 * m2;
  }
  return v;
}

Eigen::MatrixXd varimax_rotation(const Eigen::MatrixXd& a, int max_sweeps, double tol) {
  const int k = static_cast<int>(a.cols());
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(k, k);
  if (k < 2 || a.rows() < 2) return rot;
  Eigen::MatrixXd work = a;
  const double p = static_cast<double>(a.rows());
  double prev = varimax_criterion(work);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int i = 0; i < k - 1; ++i) {
      for (int j = i + 1; j < k; ++j) {
        const Eigen::ArrayXd x = work.col(i).array();
        const Eigen::ArrayXd y = work.col(j).array();
        const Eigen::ArrayXd u = x.square() - y.square();
        const Eigen::ArrayXd v = 2.0 * x * y;
        const double su = u.sum();
        const double sv = v.sum();
        const double num = 2.0 * (u * v).sum() - 2.0 * su * sv / p;
        const double den = (u.square() - v.square()).sum() - (su * su - sv * sv) / p;
        const double angle = 0.25 * std::atan2(num, den);
        if (std::abs(angle) < 1e-14) continue;
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const Eigen::VectorXd xi = work.col(i);
        work.col(i) = c * xi + s * work.col(j);
        work.col(j) = -s * xi + c * work.col(j);
        const Eigen::VectorXd ri = rot.col(i);
        rot.col(i) = c * ri + s * rot.col(j);
        rot.col(j) = -s * ri + c * rot.col(j);
      }
    }
    const double cur = varimax_criterion(work);
    if (cur - prev < tol * std::max(1.0, std::abs(cur))) break;
    prev = cur;
  }
  return rot;
}

namespace {

// Flatten per-gene loading matrices into one (M*D) x K matrix.
Eigen::MatrixXd stack_loadings(const std::vector<Eigen::MatrixXd>& lam) {
  const int m = static_cast<int>(lam.size());
  const int d = static_cast<int>(lam.front().rows());
  const int k = static_cast<int>(lam.front().cols());
  Eigen::MatrixXd flat(m * d, k);
  for (int j = 0; j < m; ++j) flat.middleRows(j * d, d) = lam[j];
  return flat;
}

// Greedy one-to-one column matching by absolute inner product. Returns, for
// each reference column l, the source column perm[l] and its sign.
void greedy_match(const Eigen::MatrixXd& cand, const Eigen::MatrixXd& ref,
                  std::vector<int>* perm, std::vector<double>* sign) {
  const int k = static_cast<int>(ref.cols());
  Eigen::MatrixXd inner = cand.transpose() * ref;  // (cand col, ref col)
  perm->assign(k, -1);
  sign->assign(k, 1.0);
  std::vector<bool> cand_used(k, false), ref_used(k, false);
  for (int step = 0; step < k; ++step) {
    double best = -1.0;
    int bc = -1, br = -1;
    for (int c = 0; c < k; ++c) {
      if (cand_used[c]) continue;
      for (int r = 0; r < k; ++r) {
        if (ref_used[r]) continue;
        if (std::abs(inner(c, r)) > best) {
          best = std::abs(inner(c, r));
          bc = c;
          br = r;
        }
      }
    }
    cand_used[bc] = true;
    ref_used[br] = true;
    (*perm)[br] = bc;
    (*sign)[br] = inner(bc, br) < 0.0 ? -1.0 : 1.0;
  }
}

}  // namespace

Eigen::MatrixXd AlignedDraws::lambda_mean() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(lambda.front().rows(), lambda.front().cols());
  for (const auto& l : lambda) m += l;
  return m / static_cast<double>(lambda.size());
}

Eigen::MatrixXd AlignedDraws::eta_mean() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(eta.front().rows(), eta.front().cols());
  for (const auto& e : eta) m += e;
  return m / static_cast<double>(eta.size());
}

AlignedDraws match_align(const PosteriorDraws& draws, const ParamLayout& layout,
                         const DoseGrid& grid, const Hyperparameters& hyper,
                         std::size_t pivot_index) {
  if (draws.size() == 0) throw std::invalid_argument("match_align: no draws");
  if (pivot_index >= draws.size()) throw std::invalid_argument("match_align: pivot out of range");
  const int k = layout.n_factors;

  AlignedDraws out;
  out.pivot = pivot_index;
  out.lambda.reserve(draws.size());
  out.eta.reserve(draws.size());

  const LatentState pivot_state = unpack_state(draws.draws[pivot_index], layout);
  const Eigen::MatrixXd pivot_flat =
      stack_loadings(loadings(pivot_state, grid, hyper));
  const Eigen::MatrixXd pivot_rot = varimax_rotation(pivot_flat);
  const Eigen::MatrixXd reference = pivot_flat * pivot_rot;

  std::vector<int> perm;
  std::vector<double> sign;
  for (std::size_t s = 0; s < draws.size(); ++s) {
    const LatentState state = unpack_state(draws.draws[s], layout);
    const Eigen::MatrixXd flat = stack_loadings(loadings(state, grid, hyper));
    const Eigen::MatrixXd rot = varimax_rotation(flat);
    greedy_match(flat * rot, reference, &perm, &sign);
    // Signed permutation on top of the draw's varimax rotation.
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, k);
    for (int l = 0; l < k; ++l) q(perm[l], l) = sign[l];
    const Eigen::MatrixXd transform = rot * q;
    out.lambda.push_back(flat * transform);
    out.eta.push_back(state.eta * transform);
    if (state.theta.size() > 0)
      out.theta.push_back(state.theta * transform);
    else
      out.theta.emplace_back(0, 0);
    if (state.beta.size() > 0) {
      Eigen::MatrixXd b(state.beta.rows(), state.beta.cols());
      for (int l = 0; l < k; ++l) b.row(l) = state.beta.row(perm[l]);
      out.beta.push_back(std::move(b));
    } else {
      out.beta.emplace_back(0, 0);
    }
  }
  return out;
}

AlignedDraws match_align(const PosteriorDraws& draws, const ParamLayout& layout,
                         const DoseGrid& grid, const Hyperparameters& hyper) {
  std::size_t pivot = 0;
  for (std::size_t s = 1; s < draws.log_post.size(); ++s)
    if (draws.log_post[s] > draws.log_post[pivot]) pivot = s;
  return match_align(draws, layout, grid, hyper, pivot);
}

}  // namespace dart
