#pragma once

#include <string>
#include <vector>

#include "dart/simulate.hpp"

namespace dart {

enum class CurveKind { kHill, kExp5, kPower };

const char* curve_kind_name(CurveKind kind);
CurveKind curve_kind_from_name(const std::string& name);

// Point evaluations on the natural concentration scale (x > 0 for hill,
// x >= 0 for exp5/power). All three share the (top, ac50, power) slot
// layout; for the power law `top` is the multiplicative scale and ac50
// is unused.
double hill_response(double x, double top, double ac50, double power);
double exp5_response(double x, double top, double ac50, double power);
double power_response(double x, double scale, double power);

struct ParametricFit {
  CurveKind kind = CurveKind::kHill;
  double top = 0.0;
  double ac50 = 1.0;
  double power = 1.0;
  double sse = 0.0;
  bool converged = false;
  int iterations = 0;

  double evaluate(double x) const;
};

// Least-squares fit of one curve family to (x, y) points. Requires at
// least four distinct x values; multi-start Levenberg-Marquardt on a
// transformed parameter scale keeps ac50 and power positive.
ParametricFit fit_curve(const std::vector<double>& x, const std::vector<double>& y,
                        CurveKind kind);

struct BenchmarkRow {
  int chem = 0;
  int gene = 0;
  CurveKind kind = CurveKind::kHill;
  int fold = 0;
  double in_rmse = 0.0;
  double out_rmse = 0.0;
  double in_r2 = 0.0;
  double out_r2 = 0.0;
  bool converged = false;
};

struct BenchmarkFoldSummary {
  CurveKind kind = CurveKind::kHill;
  int fold = 0;
  int n_pairs = 0;
  double in_rmse = 0.0;
  double out_rmse = 0.0;
  double out_r2 = 0.0;  // pooled over held-out cells of the fold
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  std::vector<BenchmarkFoldSummary> folds;
};

// Leave-one-dose-out cross-validation of the parametric baselines:
// fold f removes the f-th lowest observed dose of every (chem, gene)
// pair with enough distinct doses, fits on the remaining replicate
// means, and scores the held-out cell.
BenchmarkResult benchmark_crossval(const ObservationSet& data,
                                   const std::vector<CurveKind>& kinds, int n_folds);

void write_benchmark_csv(const std::string& path, const BenchmarkResult& result,
                         const ObservationSet& data);

}  // namespace dart
