#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dart {

// Ordered log-concentration (natural log uM) coordinates shared by every
// gene.
struct DoseGrid {
  std::vector<double> coords;

  int size() const { return static_cast<int>(coords.size()); }

  void validate() const {
    if (coords.empty()) throw std::invalid_argument("DoseGrid: empty grid");
    for (std::size_t d = 0; d < coords.size(); ++d) {
      if (!std::isfinite(coords[d]))
        throw std::invalid_argument("DoseGrid: non-finite coordinate");
      if (d > 0 && coords[d] <= coords[d - 1])
        throw std::invalid_argument("DoseGrid: coordinates must be strictly increasing");
    }
  }
};

// The six-bin grid used for the screening data: bin labels on the log-uM
// scale, two apart.
inline DoseGrid standard_dose_grid() {
  return DoseGrid{{-4.0, -2.0, 0.0, 2.0, 4.0, 6.0}};
}

// Evenly spaced grid used by the simulator when a custom size is requested.
inline DoseGrid simulation_dose_grid(int n_doses) {
  if (n_doses < 1) throw std::invalid_argument("simulation_dose_grid: n_doses < 1");
  if (n_doses == 6) return standard_dose_grid();
  DoseGrid g;
  g.coords.reserve(n_doses);
  for (int d = 0; d < n_doses; ++d) g.coords.push_back(-4.0 + 2.0 * d);
  return g;
}

}  // namespace dart
