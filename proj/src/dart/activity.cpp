#include "dart/activity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dart/csv.hpp"
#include "dart/stats.hpp"

namespace dart {

ActivityCall activity_call(const Eigen::VectorXd& s_over_doses, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("activity threshold must be > 0");
  ActivityCall call;
  for (int d = 0; d < s_over_doses.size(); ++d) {
    const double effect = std::abs(std::exp2(s_over_doses[d]) - 1.0);
    call.effect = std::max(call.effect, effect);
    if (!call.active && effect >= threshold) {
      call.active = true;
      call.dose = d;
    }
  }
  return call;
}

namespace {

// Observed activity per (chem, gene) at each threshold, from replicate-mean
// responses at the observed doses. Missing pairs are inactive by definition.
struct ObservedCalls {
  std::vector<std::uint8_t> active[3];  // n_chems * n_genes, chem-major

  bool at(int chem, int gene, int t, int n_genes) const {
    return active[t][static_cast<std::size_t>(chem) * n_genes + gene] != 0;
  }
};

ObservedCalls observed_activity(const ObservationSet& data) {
  ObservedCalls calls;
  const std::size_t n = static_cast<std::size_t>(data.n_chems) * data.n_genes;
  for (int t = 0; t < 3; ++t) calls.active[t].assign(n, 0);
  for (const auto& cell : data.cells) {
    const double mean = stats::mean(cell.responses);
    const double effect = std::abs(std::exp2(mean) - 1.0);
    const std::size_t idx = static_cast<std::size_t>(cell.chem) * data.n_genes + cell.gene;
    for (int t = 0; t < 3; ++t)
      if (effect >= kActivityThresholds[t]) calls.active[t][idx] = 1;
  }
  return calls;
}

}  // namespace

std::vector<ChemicalPriority> prioritize_chemicals(const MeanEffect& effect,
                                                   const ObservationSet& observed,
                                                   const std::vector<double>& exposure) {
  if (effect.n_chems != observed.n_chems || effect.n_genes != observed.n_genes)
    throw std::invalid_argument("prioritize_chemicals: surface/data shape mismatch");
  if (!exposure.empty() && static_cast<int>(exposure.size()) != effect.n_chems)
    throw std::invalid_argument("prioritize_chemicals: exposure size mismatch");
  const ObservedCalls seen = observed_activity(observed);

  std::vector<ChemicalPriority> out;
  for (int i = 0; i < effect.n_chems; ++i) {
    ChemicalPriority cp;
    cp.chem = i;
    if (!observed.chem_ids.empty()) cp.chem_id = observed.chem_ids[i];
    if (!exposure.empty()) {
      cp.exposure = exposure[i];
      cp.has_exposure = true;
    }
    for (int j = 0; j < effect.n_genes; ++j) {
      Eigen::VectorXd s(effect.n_doses);
      for (int d = 0; d < effect.n_doses; ++d) s[d] = effect(i, j, d);
      for (int t = 0; t < 3; ++t) {
        const ActivityCall call = activity_call(s, kActivityThresholds[t]);
        if (!call.active || seen.at(i, j, t, effect.n_genes)) continue;
        ++cp.new_genes[t];
        if (t == 0 && call.effect > cp.top_effect) {
          cp.top_effect = call.effect;
          cp.top_gene = j;
        }
      }
    }
    if (cp.new_genes[0] + cp.new_genes[1] + cp.new_genes[2] > 0) out.push_back(cp);
  }

  std::sort(out.begin(), out.end(), [](const ChemicalPriority& a, const ChemicalPriority& b) {
    if (a.has_exposure && b.has_exposure && a.exposure != b.exposure)
      return a.exposure > b.exposure;
    if (a.new_genes[1] != b.new_genes[1]) return a.new_genes[1] > b.new_genes[1];
    if (a.new_genes[2] != b.new_genes[2]) return a.new_genes[2] > b.new_genes[2];
    if (a.new_genes[0] != b.new_genes[0]) return a.new_genes[0] > b.new_genes[0];
    return a.chem < b.chem;
  });
  return out;
}

void write_priorities_csv(const std::string& path,
                          const std::vector<ChemicalPriority>& priorities,
                          const std::vector<std::string>& gene_ids) {
  auto out = csv::open_out(path);
  out << "rank,chemical,new_genes_weak,new_genes_active,new_genes_strong,"
         "top_gene,top_effect,exposure\n";
  int rank = 1;
  for (const auto& cp : priorities) {
    const std::string chem = cp.chem_id.empty() ? std::to_string(cp.chem) : cp.chem_id;
    std::string gene;
    if (cp.top_gene >= 0)
      gene = cp.top_gene < static_cast<int>(gene_ids.size()) ? gene_ids[cp.top_gene]
                                                             : std::to_string(cp.top_gene);
    out << rank++ << ',' << chem << ',' << cp.new_genes[0] << ',' << cp.new_genes[1] << ','
        << cp.new_genes[2] << ',' << gene << ',' << csv::format(cp.top_effect) << ','
        << (cp.has_exposure ? csv::format(cp.exposure) : "") << '\n';
  }
}

}  // namespace dart
