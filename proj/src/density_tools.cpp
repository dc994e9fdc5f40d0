#include "kslab/density_tools.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kslab {

double grid_lq_norm(const GridField& f, NormOrder r) {
  if (r.is_infinite()) {
    double s = 0.0;
    for (double v : f.data) s = std::max(s, std::fabs(v));
    return s;
  }
  double rv = r.value();
  double acc = 0.0;
  for (double v : f.data) acc += std::pow(std::fabs(v), rv);
  return std::pow(acc * f.spec.cell_volume(), 1.0 / rv);
}

double grid_mass(const GridField& f) {
  double acc = 0.0;
  for (double v : f.data) acc += v;
  return acc * f.spec.cell_volume();
}

double grid_min(const GridField& f) {
  double s = f.data.empty() ? 0.0 : f.data[0];
  for (double v : f.data) s = std::min(s, v);
  return s;
}

double grid_distance(const GridField& f, const GridField& g, NormOrder r) {
  if (!(f.spec == g.spec)) throw std::invalid_argument("grid_distance: spec mismatch");
  if (r.is_infinite()) {
    double s = 0.0;
    for (size_t i = 0; i < f.data.size(); ++i)
      s = std::max(s, std::fabs(f.data[i] - g.data[i]));
    return s;
  }
  double rv = r.value();
  double acc = 0.0;
  for (size_t i = 0; i < f.data.size(); ++i)
    acc += std::pow(std::fabs(f.data[i] - g.data[i]), rv);
  return std::pow(acc * f.spec.cell_volume(), 1.0 / rv);
}

NormSeries make_decay_series(const std::vector<double>& times,
                             const std::vector<double>& values, double exponent) {
  if (times.size() != values.size())
    throw std::invalid_argument("make_decay_series: length mismatch");
  NormSeries s;
  s.times = times;
  s.values = values;
  s.exponent = exponent;
  s.weighted.resize(times.size());
  s.running_sup.resize(times.size());
  double sup = 0.0;
  for (size_t i = 0; i < times.size(); ++i) {
    double w = exponent == 0.0 ? 1.0 : (times[i] > 0.0 ? std::pow(times[i], exponent) : 0.0);
    s.weighted[i] = w * values[i];
    sup = std::max(sup, s.weighted[i]);
    s.running_sup[i] = sup;
  }
  return s;
}

GridField clip_negative(const GridField& f) {
  GridField out = f;
  for (double& v : out.data) v = std::max(v, 0.0);
  return out;
}

}  // namespace kslab
