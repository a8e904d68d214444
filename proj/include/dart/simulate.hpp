#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dart/data.hpp"
#include "dart/hyper.hpp"
#include "dart/state.hpp"

namespace dart {

struct SimulationConfig {
  int n_chems = 20;
  int n_genes = 20;
  int n_doses = 5;
  int n_factors = 5;
  int replicates = 3;
  int n_w = 0;  // chemical descriptor count (0 = submodel absent)
  int n_z = 0;  // gene annotation count (0 = absent)
  double pi_miss = 0.0;      // fraction of (chem, gene, dose) triples masked
  double z_prevalence = 0.1; // Bernoulli rate for gene annotations
  std::uint64_t seed = 0;
  ModelKind kind = ModelKind::kDart;
  Hyperparameters hyper;
};

// Ground-truth dataset: retained observations in `data`, masked ones in
// `heldout` (same grid and index space), the noise-free surface, and the
// generating state. `mask` lists held-out (chem, gene, dose) triples.
struct SyntheticDataset {
  ObservationSet data;
  ObservationSet heldout;
  CovariateSet covariates;
  MeanEffect truth;
  LatentState true_state;
  ParamLayout true_layout;
  std::vector<std::array<int, 3>> mask;
  SimulationConfig config;
};

// Draws a state from the prior stack and fills the full response tensor.
// With n_w == n_z == 0 the generator collapses to the no-covariate model.
// Substreams: structure and noise use independent streams derived from
// config.seed, so masking choices never perturb the generated values.
SyntheticDataset simulate_dataset(const SimulationConfig& config);

// Moves round(pi_miss * #observed cells of the full tensor) uniformly chosen
// observed cells to heldout.
SyntheticDataset mask_triples(const SyntheticDataset& dataset, double pi_miss,
                              std::uint64_t seed);

// Partitions observed (chem, gene) pairs into k near-equal folds (sizes
// differ by at most one); fold f holds out every cell of its pairs.
std::vector<SyntheticDataset> mask_pairs(const SyntheticDataset& dataset, int k,
                                         std::uint64_t seed);

// Dose-holdout fold (1-based): for each pair observed at >= 5 distinct
// doses, masks the fold-th lowest observed dose; other pairs are untouched
// and therefore only ever contribute in-sample.
SyntheticDataset mask_dose_fold(const SyntheticDataset& dataset, int fold);

// Shared splitting cores (also used on real data), returning (retained,
// heldout) observation sets.
std::pair<ObservationSet, ObservationSet> split_cells(const ObservationSet& data,
                                                      const std::vector<std::size_t>& cell_idx);
std::pair<ObservationSet, ObservationSet> split_dose_fold(const ObservationSet& data,
                                                          int fold);
std::vector<std::pair<ObservationSet, ObservationSet>> split_pairs(
    const ObservationSet& data, int k, std::uint64_t seed);

// CSV serialization of a synthetic dataset (observations, heldout,
// covariates, truth, generating state, mask) into a directory.
void write_dataset(const SyntheticDataset& dataset, const std::string& dir);
SyntheticDataset load_dataset(const std::string& dir);

}  // namespace dart
