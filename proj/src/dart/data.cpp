#include "dart/data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dart {

long ObservationSet::total_responses() const {
  long n = 0;
  for (const auto& c : cells) n += static_cast<long>(c.responses.size());
  return n;
}

double ObservationSet::mean_dose_coord() const {
  if (cells.empty()) throw std::logic_error("ObservationSet: no observed cells");
  double sum = 0.0;
  for (const auto& c : cells) sum += grid.coords[c.dose];
  return sum / static_cast<double>(cells.size());
}

void ObservationSet::finalize() {
  grid.validate();
  if (n_chems < 1 || n_genes < 1)
    throw std::invalid_argument("ObservationSet: need at least one chemical and gene");
  if (!chem_ids.empty() && static_cast<int>(chem_ids.size()) != n_chems)
    throw std::invalid_argument("ObservationSet: chem_ids size mismatch");
  if (!gene_ids.empty() && static_cast<int>(gene_ids.size()) != n_genes)
    throw std::invalid_argument("ObservationSet: gene_ids size mismatch");
  for (const auto& c : cells) {
    if (c.chem < 0 || c.chem >= n_chems || c.gene < 0 || c.gene >= n_genes ||
        c.dose < 0 || c.dose >= grid.size())
      throw std::invalid_argument("ObservationSet: cell index out of range");
    if (c.responses.empty())
      throw std::invalid_argument("ObservationSet: cell with no replicates");
    for (double y : c.responses)
      if (!std::isfinite(y))
        throw std::invalid_argument("ObservationSet: non-finite response");
  }
  std::sort(cells.begin(), cells.end(), [](const ObservationCell& a, const ObservationCell& b) {
    if (a.gene != b.gene) return a.gene < b.gene;
    if (a.chem != b.chem) return a.chem < b.chem;
    return a.dose < b.dose;
  });
  for (std::size_t k = 1; k < cells.size(); ++k) {
    const auto& a = cells[k - 1];
    const auto& b = cells[k];
    if (a.gene == b.gene && a.chem == b.chem && a.dose == b.dose)
      throw std::invalid_argument("ObservationSet: duplicate (chem, gene, dose) cell");
  }
}

std::pair<std::size_t, std::size_t> ObservationSet::gene_range(int gene) const {
  auto lo = std::lower_bound(cells.begin(), cells.end(), gene,
                             [](const ObservationCell& c, int g) { return c.gene < g; });
  auto hi = std::upper_bound(cells.begin(), cells.end(), gene,
                             [](int g, const ObservationCell& c) { return g < c.gene; });
  return {static_cast<std::size_t>(lo - cells.begin()),
          static_cast<std::size_t>(hi - cells.begin())};
}

const ObservationCell* ObservationSet::find(int chem, int gene, int dose) const {
  auto [lo, hi] = gene_range(gene);
  for (std::size_t k = lo; k < hi; ++k) {
    if (cells[k].chem == chem && cells[k].dose == dose) return &cells[k];
    if (cells[k].chem > chem) break;
  }
  return nullptr;
}

void CovariateSet::validate(int n_chems, int n_genes) const {
  if (w.size() > 0 && w.rows() != n_chems)
    throw std::invalid_argument("CovariateSet: W row count != number of chemicals");
  if (z.size() > 0) {
    if (z.rows() != n_genes)
      throw std::invalid_argument("CovariateSet: Z row count != number of genes");
    for (Eigen::Index j = 0; j < z.rows(); ++j)
      for (Eigen::Index q = 0; q < z.cols(); ++q)
        if (z(j, q) != 0.0 && z(j, q) != 1.0)
          throw std::invalid_argument("CovariateSet: Z entries must be 0 or 1");
  }
  if (!w_names.empty() && static_cast<Eigen::Index>(w_names.size()) != w.cols())
    throw std::invalid_argument("CovariateSet: w_names size mismatch");
  if (!z_names.empty() && static_cast<Eigen::Index>(z_names.size()) != z.cols())
    throw std::invalid_argument("CovariateSet: z_names size mismatch");
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index p = 0; p < w.cols(); ++p)
      if (!std::isfinite(w(i, p)))
        throw std::invalid_argument("CovariateSet: non-finite W entry");
}

MeanEffect MeanEffect::zeros(int n_chems, int n_genes, int n_doses) {
  MeanEffect s;
  s.n_chems = n_chems;
  s.n_genes = n_genes;
  s.n_doses = n_doses;
  s.by_gene.assign(n_genes, Eigen::MatrixXd::Zero(n_chems, n_doses));
  return s;
}

}  // namespace dart
