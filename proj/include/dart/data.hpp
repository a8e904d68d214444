#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dart/grid.hpp"

namespace dart {

// One observed (chemical, gene, dose) cell with its replicate responses on
// the log2 fold-change scale.
struct ObservationCell {
  int chem = 0;
  int gene = 0;
  int dose = 0;  // index into DoseGrid::coords
  std::vector<double> responses;
};

// Sparse response tensor. Cells are kept sorted by (gene, chem, dose) so
// per-gene slices are contiguous; use gene_range() to iterate one gene.
struct ObservationSet {
  int n_chems = 0;
  int n_genes = 0;
  DoseGrid grid;
  std::vector<ObservationCell> cells;
  std::vector<std::string> chem_ids;  // optional; empty or size n_chems
  std::vector<std::string> gene_ids;

  long total_responses() const;
  // Mean grid coordinate over observed cells (unweighted by replicates).
  double mean_dose_coord() const;
  // Sorts cells and checks index ranges, replicate presence, finiteness,
  // and (chem, gene, dose) uniqueness. Throws std::invalid_argument.
  void finalize();
  // [first, last) positions in `cells` for one gene; requires finalize().
  std::pair<std::size_t, std::size_t> gene_range(int gene) const;
  const ObservationCell* find(int chem, int gene, int dose) const;
};

// Chemical descriptors W (one row per chemical) and binary gene annotations
// Z (one row per gene). Either may be empty (zero columns).
struct CovariateSet {
  Eigen::MatrixXd w;  // n_chems x P
  Eigen::MatrixXd z;  // n_genes x Q
  std::vector<std::string> w_names;
  std::vector<std::string> z_names;

  void validate(int n_chems, int n_genes) const;
};

// Dense noise-free effect surface S(i, j, d); by_gene[j] is n_chems x n_doses.
struct MeanEffect {
  int n_chems = 0;
  int n_genes = 0;
  int n_doses = 0;
  std::vector<Eigen::MatrixXd> by_gene;

  static MeanEffect zeros(int n_chems, int n_genes, int n_doses);
  double operator()(int chem, int gene, int dose) const {
    return by_gene[gene](chem, dose);
  }
  double& operator()(int chem, int gene, int dose) {
    return by_gene[gene](chem, dose);
  }
};

}  // namespace dart
