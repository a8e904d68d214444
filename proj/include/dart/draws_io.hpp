#pragma once

#include <string>

#include "dart/grid.hpp"
#include "dart/sampler.hpp"
#include "dart/state.hpp"

namespace dart {

// Posterior draws reloaded from disk together with the parameter layout and
// dose grid they were sampled under.
struct DrawsFile {
  ParamLayout layout;
  DoseGrid grid;
  PosteriorDraws draws;
};

// Versioned text format: "# dart-draws v1" header, layout and grid comment
// lines, per-chain stats lines, then one CSV row per draw
// (chain, iteration, lp, divergent, parameter values).
void write_draws(const std::string& path, const PosteriorDraws& draws,
                 const ParamLayout& layout, const DoseGrid& grid);
DrawsFile read_draws(const std::string& path);

}  // namespace dart
