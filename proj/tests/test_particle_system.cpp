#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "kslab/density_tools.hpp"
#include "kslab/particle_system.hpp"

using namespace kslab;

namespace {

GaussianMixture centered(int d, double var) {
  GaussianMixture m;
  m.d = d;
  m.components.push_back({1.0, {0.0, 0.0, 0.0}, var});
  return m;
}

ParticleConfig free_config(int d, long n, double dt, double T, uint64_t seed = 11) {
  ParticleConfig cfg;
  cfg.d = d;
  cfg.n_particles = n;
  cfg.dt = dt;
  cfg.T = T;
  cfg.chi = 0.0;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("free particles gain unit variance per unit time") {
  ParticleConfig cfg = free_config(2, 20000, 0.05, 1.0);
  ParticleSystem sys(cfg, centered(2, 0.5), centered(2, 1.0));
  const std::vector<double> v0 = sys.axis_variances();
  for (double v : v0) CHECK(v == doctest::Approx(0.5).epsilon(0.05));
  sys.run();
  CHECK(sys.time() == doctest::Approx(1.0));
  const std::vector<double> v1 = sys.axis_variances();
  for (int a = 0; a < 2; ++a) CHECK(v1[a] - v0[a] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("particle streams are independent of the population size") {
  // with chi = 0 every particle only touches its own stream, so the first
  // particles of a larger run reproduce the smaller run exactly
  ParticleConfig small = free_config(2, 5, 0.1, 0.5, 99);
  ParticleConfig large = small;
  large.n_particles = 10;
  ParticleSystem a(small, centered(2, 1.0), centered(2, 1.0));
  ParticleSystem b(large, centered(2, 1.0), centered(2, 1.0));
  a.run();
  b.run();
  for (long i = 0; i < small.n_particles * 2; ++i)
    CHECK(a.positions()[i] == b.positions()[i]);
}

TEST_CASE("worker count does not change the trajectories") {
  ParticleConfig c1 = free_config(2, 64, 0.1, 0.3, 7);
  c1.chi = 0.05;
  c1.epsilon = 0.1;
  ParticleConfig c8 = c1;
  c8.workers = 8;
  c1.workers = 1;
  ParticleSystem a(c1, centered(2, 1.0), centered(2, 1.0));
  ParticleSystem b(c8, centered(2, 1.0), centered(2, 1.0));
  a.run();
  b.run();
  for (size_t i = 0; i < a.positions().size(); ++i)
    CHECK(a.positions()[i] == b.positions()[i]);
}

TEST_CASE("backends agree on a shared history") {
  ParticleConfig cfg;
  cfg.d = 2;
  cfg.n_particles = 400;
  cfg.dt = 0.01;
  cfg.T = 0.3;
  cfg.chi = 0.5;
  cfg.lambda = 0.5;
  cfg.epsilon = 0.05;
  cfg.seed = 3;
  cfg.backend = DriftBackend::kPairwise;
  cfg.dual_history = true;
  cfg.mesh.d = 2;
  cfg.mesh.n = 128;
  cfg.mesh.L = 20.0;
  ParticleSystem sys(cfg, centered(2, 1.0), centered(2, 1.0));
  sys.run();
  std::vector<double> pair, mesh;
  sys.eval_drift(DriftBackend::kPairwise, pair);
  sys.eval_drift(DriftBackend::kMesh, mesh);
  REQUIRE(pair.size() == mesh.size());
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < pair.size(); ++i) {
    num += (pair[i] - mesh[i]) * (pair[i] - mesh[i]);
    den += pair[i] * pair[i];
  }
  REQUIRE(den > 0.0);
  CHECK(std::sqrt(num / den) < 0.02);
}

TEST_CASE("kernel density estimate has unit mass and matches the smoothed start") {
  ParticleConfig cfg = free_config(2, 20000, 0.1, 0.1, 21);
  ParticleSystem sys(cfg, centered(2, 1.0), centered(2, 1.0));
  GridSpec grid;
  grid.d = 2;
  grid.n = 64;
  grid.L = 16.0;
  const KdeResult kde = sys.empirical_density(grid);
  CHECK(grid_mass(kde.field) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kde.bandwidth > 0.0);
  CHECK(!kde.sparse_warning);

  // at t = 0 the KDE estimates rho0 * gaussian(h^2)
  const GaussianMixture smoothed = centered(2, 1.0).heat_convolved(kde.bandwidth * kde.bandwidth);
  GridField want(grid);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      double x[2] = {grid.coord(i), grid.coord(j)};
      want.data[i * grid.n + j] = smoothed.value(x);
    }
  CHECK(grid_distance(kde.field, want, NormOrder::finite(1.0)) < 0.05);
}

TEST_CASE("interacting drift stays under its envelope") {
  ParticleConfig cfg;
  cfg.d = 2;
  cfg.n_particles = 500;
  cfg.dt = 0.01;
  cfg.T = 0.2;
  cfg.chi = 0.05;
  cfg.lambda = 1.0;
  cfg.epsilon = 0.02;
  cfg.seed = 17;
  ParticleSystem sys(cfg, centered(2, 1.0), centered(2, 1.0));
  double worst = 0.0;
  while (sys.time() < cfg.T - 1e-12) {
    sys.advance();
    worst = std::max(worst, std::sqrt(sys.time()) * sys.last_drift_sup());
  }
  // generous structural cap: the drift envelope coefficient is O(chi)
  CHECK(worst < 1.0);
  CHECK(sys.last_drifts().size() == static_cast<size_t>(cfg.n_particles * cfg.d));
}

TEST_CASE("slice history respects its cap and keeps the endpoints") {
  ParticleConfig cfg;
  cfg.d = 1;
  cfg.n_particles = 50;
  cfg.dt = 0.01;
  cfg.T = 1.0;
  cfg.chi = 0.1;
  cfg.epsilon = 0.05;
  cfg.seed = 5;
  cfg.max_slices = 16;
  ParticleSystem sys(cfg, centered(1, 1.0), centered(1, 1.0));
  sys.run();
  CHECK(sys.retained_slices() <= cfg.max_slices);
  CHECK(sys.retained_slices() >= 2);
  CHECK(sys.step_count() == 100);
}

TEST_CASE("construction guards") {
  const GaussianMixture r0 = centered(2, 1.0);
  ParticleConfig cfg = free_config(2, 10, 0.1, 0.5);
  cfg.chi = 0.3;  // interacting but unregularized
  cfg.epsilon = 0.0;
  cfg.delta_cutoff = 0.0;
  CHECK_THROWS_AS(ParticleSystem(cfg, r0, r0), std::invalid_argument);

  cfg = free_config(2, 10, 0.1, 0.5);
  cfg.d = 4;
  CHECK_THROWS_AS(ParticleSystem(cfg, r0, r0), std::invalid_argument);

  cfg = free_config(2, 0, 0.1, 0.5);
  CHECK_THROWS_AS(ParticleSystem(cfg, r0, r0), std::invalid_argument);

  cfg = free_config(3, 10, 0.1, 0.5);  // dimension mismatch with mixtures
  CHECK_THROWS_AS(ParticleSystem(cfg, r0, r0), std::invalid_argument);

  // mesh backend needs a grid
  cfg = free_config(2, 10, 0.1, 0.5);
  cfg.chi = 0.1;
  cfg.epsilon = 0.05;
  cfg.backend = DriftBackend::kMesh;
  CHECK_THROWS_AS(ParticleSystem(cfg, r0, r0), std::invalid_argument);
}

TEST_CASE("memory cutoff runs without mollification") {
  ParticleConfig cfg;
  cfg.d = 2;
  cfg.n_particles = 100;
  cfg.dt = 0.02;
  cfg.T = 0.2;
  cfg.chi = 0.2;
  cfg.epsilon = 0.0;
  cfg.delta_cutoff = 0.04;  // two steps of protected lag
  cfg.seed = 29;
  ParticleSystem sys(cfg, centered(2, 1.0), centered(2, 1.0));
  sys.run();
  CHECK(sys.time() == doctest::Approx(0.2));
  // drifts stay finite despite the unmollified kernel
  CHECK(std::isfinite(sys.last_drift_sup()));
}
