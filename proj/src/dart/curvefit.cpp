#include "dart/curvefit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "dart/csv.hpp"
#include "dart/diagnostics.hpp"
#include "dart/stats.hpp"

namespace dart {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Parameters are optimized as t = (top, log ac50, log power) for hill and
// exp5, and t = (scale, log power) for the power law, which keeps ac50 and
// power positive without explicit constraints.
struct CurveEval {
  double value = 0.0;
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();  // d/dt, unused tail = 0
};

CurveEval eval_hill(double x, const Eigen::Vector3d& t) {
  if (!(x > 0.0)) throw std::domain_error("hill curve needs x > 0");
  CurveEval out;
  const double top = t[0];
  const double p = std::exp(t[2]);
  const double w = p * (t[1] - std::log(x));
  // g = 1 / (1 + e^w), computed from the side that cannot overflow.
  double g;
  if (w > 0.0) {
    const double e = std::exp(-w);
    g = e / (1.0 + e);
  } else {
    g = 1.0 / (1.0 + std::exp(w));
  }
  const double g1g = g * (1.0 - g);
  out.value = top * g;
  out.grad[0] = g;
  out.grad[1] = -top * p * g1g;
  out.grad[2] = -top * w * g1g;
  return out;
}

CurveEval eval_exp5(double x, const Eigen::Vector3d& t) {
  if (x < 0.0) throw std::domain_error("exp5 curve needs x >= 0");
  CurveEval out;
  const double top = t[0];
  if (x == 0.0) return out;  // f(0) = 0 with zero sensitivity everywhere
  const double p = std::exp(t[2]);
  const double v = p * (std::log(x) - t[1]);
  if (v >= 700.0) {  // u overflows; curve has saturated at top
    out.value = top;
    out.grad[0] = 1.0;
    return out;
  }
  const double u = std::exp(v);
  const double e = std::exp(-u * kLn2);
  out.value = top * (1.0 - e);
  out.grad[0] = 1.0 - e;
  const double common = top * kLn2 * e * u;
  out.grad[1] = -common * p;
  out.grad[2] = common * v;
  return out;
}

CurveEval eval_power(double x, const Eigen::Vector3d& t) {
  if (x < 0.0) throw std::domain_error("power curve needs x >= 0");
  CurveEval out;
  const double a = t[0];
  const double p = std::exp(t[1]);
  if (x == 0.0) return out;
  const double xp = std::exp(p * std::log(x));
  out.value = a * xp;
  out.grad[0] = xp;
  out.grad[1] = a * xp * std::log(x) * p;
  return out;
}

CurveEval eval_curve(CurveKind kind, double x, const Eigen::Vector3d& t) {
  switch (kind) {
    case CurveKind::kHill:
      return eval_hill(x, t);
    case CurveKind::kExp5:
      return eval_exp5(x, t);
    case CurveKind::kPower:
      return eval_power(x, t);
  }
  throw std::logic_error("unknown curve kind");
}

int curve_n_params(CurveKind kind) { return kind == CurveKind::kPower ? 2 : 3; }

double sse_at(CurveKind kind, const std::vector<double>& x, const std::vector<double>& y,
              const Eigen::Vector3d& t) {
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = eval_curve(kind, x[i], t).value - y[i];
    sse += r * r;
  }
  return sse;
}

struct LmResult {
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  double sse = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

LmResult levenberg_marquardt(CurveKind kind, const std::vector<double>& x,
                             const std::vector<double>& y, Eigen::Vector3d t,
                             const Eigen::Vector3d& lower, const Eigen::Vector3d& upper) {
  const int np = curve_n_params(kind);
  const int n = static_cast<int>(x.size());
  LmResult res;
  res.t = t.cwiseMax(lower).cwiseMin(upper);
  res.sse = sse_at(kind, x, y, res.t);
  double lambda = 1e-3;
  constexpr int kMaxIter = 500;
  while (res.iterations < kMaxIter) {
    ++res.iterations;
    Eigen::MatrixXd jac(n, np);
    Eigen::VectorXd resid(n);
    for (int i = 0; i < n; ++i) {
      const CurveEval e = eval_curve(kind, x[i], res.t);
      resid[i] = e.value - y[i];
      jac.row(i) = e.grad.head(np).transpose();
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * resid;
    Eigen::MatrixXd damped = jtj;
    damped.diagonal() += lambda * jtj.diagonal();
    damped.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
    if (!step.allFinite()) {
      lambda *= 4.0;
      continue;
    }
    Eigen::Vector3d cand = res.t;
    cand.head(np) += step;
    cand = cand.cwiseMax(lower).cwiseMin(upper);
    const double cand_sse = sse_at(kind, x, y, cand);
    if (cand_sse < res.sse) {
      const double drop = res.sse - cand_sse;
      const double moved = (cand - res.t).cwiseAbs().maxCoeff();
      res.t = cand;
      res.sse = cand_sse;
      lambda = std::max(lambda / 3.0, 1e-12);
      if (moved < 1e-10 || drop < 1e-14 * std::max(res.sse, 1.0)) {
        res.converged = true;
        break;
      }
    } else {
      lambda *= 4.0;
      if (lambda > 1e12) {  // stalled at a (possibly local) minimum
        res.converged = true;
        break;
      }
    }
  }
  return res;
}

}  // namespace

const char* curve_kind_name(CurveKind kind) {
  switch (kind) {
    case CurveKind::kHill:
      return "hill";
    case CurveKind::kExp5:
      return "exp5";
    case CurveKind::kPower:
      return "power";
  }
  return "?";
}

CurveKind curve_kind_from_name(const std::string& name) {
  if (name == "hill") return CurveKind::kHill;
  if (name == "exp5") return CurveKind::kExp5;
  if (name == "power") return CurveKind::kPower;
  throw std::invalid_argument("unknown curve kind: " + name);
}

double hill_response(double x, double top, double ac50, double power) {
  if (!(ac50 > 0.0) || !(power > 0.0)) throw std::domain_error("hill needs ac50, power > 0");
  return eval_hill(x, {top, std::log(ac50), std::log(power)}).value;
}

double exp5_response(double x, double top, double ac50, double power) {
  if (!(ac50 > 0.0) || !(power > 0.0)) throw std::domain_error("exp5 needs ac50, power > 0");
  return eval_exp5(x, {top, std::log(ac50), std::log(power)}).value;
}

double power_response(double x, double scale, double power) {
  if (!(power > 0.0)) throw std::domain_error("power law needs power > 0");
  return eval_power(x, {scale, std::log(power), 0.0}).value;
}

double ParametricFit::evaluate(double x) const {
  switch (kind) {
    case CurveKind::kHill:
      return hill_response(x, top, ac50, power);
    case CurveKind::kExp5:
      return exp5_response(x, top, ac50, power);
    case CurveKind::kPower:
      return power_response(x, top, power);
  }
  throw std::logic_error("unknown curve kind");
}

ParametricFit fit_curve(const std::vector<double>& x, const std::vector<double>& y,
                        CurveKind kind) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_curve: x/y size mismatch");
  std::vector<double> xs = x;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.size() < 4) throw std::invalid_argument("fit_curve needs >= 4 distinct doses");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("fit_curve: non-finite input");
    if (x[i] < 0.0 || (kind == CurveKind::kHill && x[i] == 0.0))
      throw std::domain_error("fit_curve: dose outside curve domain");
  }
  double x_min_pos = std::numeric_limits<double>::infinity();
  double x_max = 0.0;
  for (double xi : xs) {
    if (xi > 0.0) x_min_pos = std::min(x_min_pos, xi);
    x_max = std::max(x_max, xi);
  }
  if (!(x_max > 0.0)) throw std::invalid_argument("fit_curve: needs positive doses");

  double top_init = 0.0;
  for (double yi : y)
    if (std::abs(yi) > std::abs(top_init)) top_init = yi;

  Eigen::Vector3d lower, upper;
  if (kind == CurveKind::kPower) {
    lower = {-1e6, std::log(1e-4), 0.0};
    upper = {1e6, std::log(10.0), 0.0};
  } else {
    lower = {-10.0, std::log(x_min_pos / 10.0), std::log(1e-4)};
    upper = {10.0, std::log(x_max * 10.0), std::log(10.0)};
  }

  constexpr int kStarts = 20;
  LmResult best;
  for (int s = 0; s < kStarts; ++s) {
    const double frac = kStarts > 1 ? static_cast<double>(s) / (kStarts - 1) : 0.5;
    Eigen::Vector3d t0;
    if (kind == CurveKind::kPower) {
      const double lp = std::log(0.1) + frac * (std::log(10.0) - std::log(0.1));
      const double p = std::exp(lp);
      // Closed-form scale given the exponent.
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        const double xp = std::exp(p * std::log(x[i]));
        num += y[i] * xp;
        den += xp * xp;
      }
      t0 = {den > 0.0 ? num / den : 0.0, lp, 0.0};
    } else {
      const double la = lower[1] + frac * (upper[1] - lower[1]);
      t0 = {std::clamp(top_init, lower[0], upper[0]), la, 0.0};
    }
    const LmResult run = levenberg_marquardt(kind, x, y, t0, lower, upper);
    if (run.sse < best.sse) best = run;
  }

  ParametricFit fit;
  fit.kind = kind;
  fit.sse = best.sse;
  fit.converged = best.converged;
  fit.iterations = best.iterations;
  if (kind == CurveKind::kPower) {
    fit.top = best.t[0];
    fit.power = std::exp(best.t[1]);
    fit.ac50 = std::numeric_limits<double>::quiet_NaN();
  } else {
    fit.top = best.t[0];
    fit.ac50 = std::exp(best.t[1]);
    fit.power = std::exp(best.t[2]);
  }
  return fit;
}

namespace {

double replicate_mean(const ObservationCell& cell) { return stats::mean(cell.responses); }

std::pair<double, double> rmse_r2_vec(const std::vector<double>& pred,
                                      const std::vector<double>& obs) {
  return rmse_r2(Eigen::Map<const Eigen::VectorXd>(pred.data(), pred.size()),
                 Eigen::Map<const Eigen::VectorXd>(obs.data(), obs.size()));
}

struct PairPoints {
  std::vector<double> x, y;
};

}  // namespace

BenchmarkResult benchmark_crossval(const ObservationSet& data,
                                   const std::vector<CurveKind>& kinds, int n_folds) {
  if (n_folds < 1) throw std::invalid_argument("benchmark_crossval: n_folds must be >= 1");
  if (kinds.empty()) throw std::invalid_argument("benchmark_crossval: no curve kinds");
  BenchmarkResult result;
  for (int fold = 1; fold <= n_folds; ++fold) {
    const auto [train, test] = split_dose_fold(data, fold);
    // Collect train/test points per (chem, gene) pair that lost a cell.
    std::map<std::pair<int, int>, PairPoints> test_points;
    for (const auto& cell : test.cells) {
      auto& pts = test_points[{cell.chem, cell.gene}];
      pts.x.push_back(std::exp(test.grid.coords[cell.dose]));
      pts.y.push_back(replicate_mean(cell));
    }
    std::map<std::pair<int, int>, PairPoints> train_points;
    for (const auto& cell : train.cells) {
      const auto key = std::make_pair(cell.chem, cell.gene);
      if (!test_points.count(key)) continue;
      auto& pts = train_points[key];
      pts.x.push_back(std::exp(train.grid.coords[cell.dose]));
      pts.y.push_back(replicate_mean(cell));
    }
    for (CurveKind kind : kinds) {
      BenchmarkFoldSummary summary;
      summary.kind = kind;
      summary.fold = fold;
      std::vector<double> pooled_pred, pooled_obs;
      double in_sq = 0.0, out_sq = 0.0;
      std::size_t in_n = 0, out_n = 0;
      for (const auto& [key, held] : test_points) {
        const PairPoints& fitpts = train_points.at(key);
        const ParametricFit fit = fit_curve(fitpts.x, fitpts.y, kind);
        BenchmarkRow row;
        row.chem = key.first;
        row.gene = key.second;
        row.kind = kind;
        row.fold = fold;
        row.converged = fit.converged;
        std::vector<double> in_pred(fitpts.x.size());
        for (std::size_t i = 0; i < fitpts.x.size(); ++i) in_pred[i] = fit.evaluate(fitpts.x[i]);
        const auto [in_rmse, in_r2] = rmse_r2_vec(in_pred, fitpts.y);
        row.in_rmse = in_rmse;
        row.in_r2 = in_r2;
        std::vector<double> out_pred(held.x.size());
        for (std::size_t i = 0; i < held.x.size(); ++i) out_pred[i] = fit.evaluate(held.x[i]);
        const auto [out_rmse, out_r2] = rmse_r2_vec(out_pred, held.y);
        row.out_rmse = out_rmse;
        row.out_r2 = out_r2;  // NaN with a single held-out cell; pooled below
        result.rows.push_back(row);
        ++summary.n_pairs;
        for (std::size_t i = 0; i < fitpts.x.size(); ++i) {
          const double r = in_pred[i] - fitpts.y[i];
          in_sq += r * r;
        }
        in_n += fitpts.x.size();
        for (std::size_t i = 0; i < held.x.size(); ++i) {
          const double r = out_pred[i] - held.y[i];
          out_sq += r * r;
          pooled_pred.push_back(out_pred[i]);
          pooled_obs.push_back(held.y[i]);
        }
        out_n += held.x.size();
      }
      summary.in_rmse = in_n ? std::sqrt(in_sq / in_n) : std::numeric_limits<double>::quiet_NaN();
      summary.out_rmse =
          out_n ? std::sqrt(out_sq / out_n) : std::numeric_limits<double>::quiet_NaN();
      summary.out_r2 = pooled_obs.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : rmse_r2_vec(pooled_pred, pooled_obs).second;
      result.folds.push_back(summary);
    }
  }
  return result;
}

void write_benchmark_csv(const std::string& path, const BenchmarkResult& result,
                         const ObservationSet& data) {
  auto pair_name = [&](int chem, int gene) {
    const std::string c =
        chem < static_cast<int>(data.chem_ids.size()) && !data.chem_ids.empty()
            ? data.chem_ids[chem]
            : std::to_string(chem);
    const std::string g =
        gene < static_cast<int>(data.gene_ids.size()) && !data.gene_ids.empty()
            ? data.gene_ids[gene]
            : std::to_string(gene);
    return c + ":" + g;
  };
  auto out = csv::open_out(path);
  out << "pair,kind,fold,in_rmse,out_rmse,in_r2,out_r2,converged\n";
  for (const auto& row : result.rows) {
    out << pair_name(row.chem, row.gene) << ',' << curve_kind_name(row.kind) << ',' << row.fold
        << ',' << csv::format(row.in_rmse) << ',' << csv::format(row.out_rmse) << ','
        << csv::format(row.in_r2) << ',' << csv::format(row.out_r2) << ','
        << (row.converged ? 1 : 0) << '\n';
  }
  std::string folds_path = path;
  const auto dot = folds_path.rfind(".csv");
  if (dot != std::string::npos && dot == folds_path.size() - 4)
    folds_path = folds_path.substr(0, dot) + "_folds.csv";
  else
    folds_path += "_folds";
  auto fout = csv::open_out(folds_path);
  fout << "kind,fold,n_pairs,in_rmse,out_rmse,out_r2\n";
  for (const auto& s : result.folds) {
    fout << curve_kind_name(s.kind) << ',' << s.fold << ',' << s.n_pairs << ','
         << csv::format(s.in_rmse) << ',' << csv::format(s.out_rmse) << ','
         << csv::format(s.out_r2) << '\n';
  }
}

}  // namespace dart
