#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "kslab/density_tools.hpp"
#include "kslab/pde_solver.hpp"

using namespace kslab;

namespace {

GaussianMixture centered(int d, double var) {
  GaussianMixture m;
  m.d = d;
  m.components.push_back({1.0, {0.0, 0.0, 0.0}, var});
  return m;
}

GaussianMixture offset2d() {
  GaussianMixture m;
  m.d = 2;
  m.components.push_back({0.7, {1.0, -0.5, 0.0}, 0.8});
  m.components.push_back({0.3, {-1.2, 0.6, 0.0}, 1.1});
  return m;
}

PdeConfig base_config(int d, int n, double L, double dt, double T) {
  PdeConfig cfg;
  cfg.grid.d = d;
  cfg.grid.n = n;
  cfg.grid.L = L;
  cfg.dt = dt;
  cfg.T = T;
  return cfg;
}

}  // namespace

TEST_CASE("mass is conserved to machine precision with coupling on") {
  PdeConfig cfg = base_config(2, 32, 12.0, 1e-3, 0.2);
  cfg.chi = 0.5;
  cfg.lambda = 1.0;
  cfg.norm_stride = 1;
  PdeSolver solver(cfg, offset2d(), centered(2, 1.0));
  const double m0 = solver.mass();
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(solver.run() == StepStatus::kOk);
  CHECK(solver.step_count() == 200);
  for (double m : solver.trace().mass) CHECK(std::abs(m - m0) <= 1e-13);
}

TEST_CASE("zero coupling reduces to the heat semigroup") {
  PdeConfig cfg = base_config(2, 128, 20.0, 1e-2, 1.0);
  cfg.chi = 0.0;
  cfg.snapshot_stride = 10;
  const GaussianMixture rho0 = offset2d();
  PdeSolver solver(cfg, rho0, centered(2, 1.0));
  REQUIRE(solver.run() == StepStatus::kOk);
  const GaussianMixture exact = rho0.heat_convolved(cfg.T);
  const GridField got = solver.density();
  GridField want(cfg.grid);
  for (int i = 0; i < cfg.grid.n; ++i)
    for (int j = 0; j < cfg.grid.n; ++j) {
      double x[2] = {cfg.grid.coord(i), cfg.grid.coord(j)};
      want.data[i * cfg.grid.n + j] = exact.value(x);
    }
  const double rel = grid_distance(got, want, NormOrder::finite(2.0)) /
                     grid_lq_norm(want, NormOrder::finite(2.0));
  CHECK(rel < 1e-6);
}

TEST_CASE("dynamics are translation equivariant for integer-cell shifts") {
  // box large enough that the sampled tails are at machine zero; otherwise
  // resampling the shifted mixture is not an exact grid shift
  PdeConfig cfg = base_config(2, 32, 24.0, 2e-3, 0.05);
  cfg.chi = 0.8;
  cfg.lambda = 0.5;
  const double shift = 2.0 * cfg.grid.h();  // two cells

  GaussianMixture rho0 = offset2d();
  GaussianMixture c0 = centered(2, 1.2);
  PdeSolver a(cfg, rho0, c0);

  GaussianMixture rho0s = rho0, c0s = c0;
  for (auto& comp : rho0s.components) comp.mean[0] += shift;
  for (auto& comp : c0s.components) comp.mean[0] += shift;
  PdeSolver b(cfg, rho0s, c0s);

  REQUIRE(a.run() == StepStatus::kOk);
  REQUIRE(b.run() == StepStatus::kOk);

  const GridField fa = a.density();
  const GridField fb = b.density();
  const int n = cfg.grid.n;
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int ishift = (i + 2) % n;
      worst = std::max(worst, std::abs(fb.data[ishift * n + j] - fa.data[i * n + j]));
    }
  const double scale = grid_lq_norm(fa, NormOrder::infinity());
  CHECK(worst / scale < 1e-12);
}

TEST_CASE("chemical from the integral representation matches the stepped field") {
  PdeConfig cfg = base_config(2, 48, 16.0, 1e-3, 0.25);
  cfg.chi = 0.4;
  cfg.lambda = 1.0;
  cfg.snapshot_stride = 1;
  PdeSolver solver(cfg, offset2d(), centered(2, 1.0));
  REQUIRE(solver.run() == StepStatus::kOk);
  const GridField direct = solver.chemical();
  const GridField rebuilt = solver.duhamel_c();
  // the rebuilt field uses trapezoid weights over the stored slices, the
  // stepped field the per-step integrator, so agreement is quadrature-limited
  const double rel = grid_distance(direct, rebuilt, NormOrder::infinity()) /
                     grid_lq_norm(direct, NormOrder::infinity());
  CHECK(rel < 1e-6);
}

TEST_CASE("mild residual shrinks at first order in the step size") {
  const double T = 0.2;
  double residual[3];
  int level = 0;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    PdeConfig cfg = base_config(1, 64, 16.0, dt, T);
    cfg.chi = 0.6;
    cfg.lambda = 0.8;
    cfg.snapshot_stride = 1;
    PdeSolver solver(cfg, centered(1, 0.8), centered(1, 1.0));
    REQUIRE(solver.run() == StepStatus::kOk);
    residual[level++] = solver.mild_residual(NormOrder::finite(2.0));
  }
  CHECK(residual[0] / residual[1] > 1.8);
  CHECK(residual[1] / residual[2] > 1.8);
}

TEST_CASE("second order stepping also conserves mass and tracks the flow") {
  PdeConfig cfg = base_config(2, 32, 12.0, 2e-3, 0.1);
  cfg.chi = 0.5;
  cfg.lambda = 0.7;
  cfg.order = 2;
  PdeSolver solver(cfg, offset2d(), centered(2, 1.0));
  const double m0 = solver.mass();
  REQUIRE(solver.run() == StepStatus::kOk);
  CHECK(std::abs(solver.mass() - m0) <= 1e-13);

  // order 2 should beat order 1 against a fine-step reference
  PdeConfig ref_cfg = cfg;
  ref_cfg.order = 1;
  ref_cfg.dt = 1.25e-4;
  PdeSolver ref(ref_cfg, offset2d(), centered(2, 1.0));
  REQUIRE(ref.run() == StepStatus::kOk);
  PdeConfig o1_cfg = cfg;
  o1_cfg.order = 1;
  PdeSolver o1(o1_cfg, offset2d(), centered(2, 1.0));
  REQUIRE(o1.run() == StepStatus::kOk);
  const GridField fr = ref.density();
  const double e2 = grid_distance(solver.density(), fr, NormOrder::finite(2.0));
  const double e1 = grid_distance(o1.density(), fr, NormOrder::finite(2.0));
  CHECK(e2 < e1);
}

TEST_CASE("overdriven coupling reports a structured blow-up") {
  PdeConfig cfg = base_config(2, 32, 4.0, 5e-3, 2.0);
  cfg.chi = 400.0;
  cfg.lambda = 0.0;
  cfg.blowup_sup_cap = 1e4;
  GaussianMixture rho0 = centered(2, 0.05);
  PdeSolver solver(cfg, rho0, rho0);
  const StepStatus st = solver.run();
  REQUIRE(st == StepStatus::kBlowUp);
  REQUIRE(solver.blowup_info().has_value());
  CHECK(solver.blowup_info()->sup_norm >= cfg.blowup_sup_cap);
  CHECK(solver.blowup_info()->time <= cfg.T);
  CHECK(solver.blowup_info()->step > 0);
}

TEST_CASE("norm trace carries the decay diagnostics") {
  PdeConfig cfg = base_config(2, 32, 12.0, 1e-2, 0.3);
  cfg.chi = 0.2;
  cfg.lambda = 1.0;
  cfg.norm_q = 3.0;
  PdeSolver solver(cfg, offset2d(), centered(2, 1.0));
  REQUIRE(solver.run() == StepStatus::kOk);
  const NormTrace& tr = solver.trace();
  REQUIRE(!tr.times.empty());
  REQUIRE(tr.norm_q.size() == tr.times.size());
  REQUIRE(tr.drift_sup.size() == tr.times.size());
  for (double v : tr.norm_q) CHECK(v > 0.0);

  const DecayEntry weighted = decay_entry(tr.times, tr.norm_q, 2, 3.0);
  CHECK(weighted.weighted);
  CHECK(weighted.exponent == doctest::Approx(1.0 - 2.0 / 6.0));
  CHECK(weighted.sup_value > 0.0);
  const DecayEntry plain = decay_entry(tr.times, tr.norm_dhalf, 2, 1.0);
  CHECK(!plain.weighted);
  CHECK(plain.exponent == 0.0);
}

TEST_CASE("grid initial data constructor agrees with the mixture one") {
  PdeConfig cfg = base_config(2, 32, 12.0, 1e-3, 0.02);
  cfg.chi = 0.3;
  cfg.lambda = 0.5;
  const GaussianMixture rho0 = offset2d();
  const GaussianMixture c0 = centered(2, 1.0);
  GridField rf(cfg.grid), cf(cfg.grid);
  for (int i = 0; i < cfg.grid.n; ++i)
    for (int j = 0; j < cfg.grid.n; ++j) {
      double x[2] = {cfg.grid.coord(i), cfg.grid.coord(j)};
      rf.data[i * cfg.grid.n + j] = rho0.value(x);
      cf.data[i * cfg.grid.n + j] = c0.value(x);
    }
  const double m0 = grid_mass(rf);
  for (double& v : rf.data) v /= m0;  // match the unit-mass normalization of the mixture path
  PdeSolver a(cfg, rho0, c0);
  PdeSolver b(cfg, rf, cf);
  REQUIRE(a.run() == StepStatus::kOk);
  REQUIRE(b.run() == StepStatus::kOk);
  CHECK(grid_distance(a.density(), b.density(), NormOrder::infinity()) < 1e-12);
}
