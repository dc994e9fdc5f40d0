#pragma once

#include <vector>

#include "kslab/grid.hpp"
#include "kslab/special_functions.hpp"

namespace kslab {

double grid_lq_norm(const GridField& f, NormOrder r);
double grid_mass(const GridField& f);
double grid_min(const GridField& f);

// || f - g ||_r on a shared grid.
double grid_distance(const GridField& f, const GridField& g, NormOrder r);

// Time series of norms with the decay weight t^exponent and its running sup.
struct NormSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> weighted;
  std::vector<double> running_sup;
  double exponent = 0.0;

  double sup() const { return running_sup.empty() ? 0.0 : running_sup.back(); }
};

NormSeries make_decay_series(const std::vector<double>& times,
                             const std::vector<double>& values, double exponent);

// Negative values clipped to zero (used when reporting estimated densities).
GridField clip_negative(const GridField& f);

}  // namespace kslab
