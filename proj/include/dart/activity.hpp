#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dart/data.hpp"

namespace dart {

// A (chem, gene) pair counts as active at threshold t when some dose has
// |2^s - 1| >= t, i.e. the fold change moves at least t away from 1.
struct ActivityCall {
  bool active = false;
  int dose = -1;        // smallest active dose index, -1 if inactive
  double effect = 0.0;  // max |2^s - 1| over doses
};

ActivityCall activity_call(const Eigen::VectorXd& s_over_doses, double threshold);

// Thresholds used for the weak / active / strong calls below.
inline constexpr double kActivityThresholds[3] = {0.25, 0.5, 0.75};

struct ChemicalPriority {
  int chem = 0;
  std::string chem_id;
  // Genes newly called at each threshold (predicted active, not already
  // active in the observed replicate means at the same threshold).
  int new_genes[3] = {0, 0, 0};
  int top_gene = -1;  // strongest newly-called gene at the weakest threshold
  double top_effect = 0.0;
  double exposure = 0.0;
  bool has_exposure = false;
};

// Ranks chemicals by what the completed surface adds over the observed
// data. Only chemicals with at least one newly-called gene appear. With
// exposure values the ranking is exposure-first; otherwise by counts.
std::vector<ChemicalPriority> prioritize_chemicals(
    const MeanEffect& effect, const ObservationSet& observed,
    const std::vector<double>& exposure = {});

void write_priorities_csv(const std::string& path,
                          const std::vector<ChemicalPriority>& priorities,
                          const std::vector<std::string>& gene_ids);

}  // namespace dart
