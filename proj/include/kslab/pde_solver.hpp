#pragma once

#include <optional>
#include <vector>

#include "kslab/fields.hpp"
#include "kslab/grid.hpp"
#include "kslab/special_functions.hpp"

namespace kslab {

struct PdeConfig {
  GridSpec grid;
  double dt = 1e-3;
  double T = 1.0;
  double chi = 0.0;
  double lambda = 0.0;
  int order = 1;           // 1 = exponential Euler, 2 = ETD-RK2 for the transport term
  double blowup_sup_cap = 1e8;
  int snapshot_stride = 1; // spectral history snapshot cadence (steps)
  bool keep_c_history = true;
  int norm_stride = 1;     // norm-trace cadence (steps)
  double norm_q = 0.0;     // order tracked in the trace; 0 -> 3d/2
};

enum class StepStatus { kOk, kBlowUp };

struct BlowUpInfo {
  double time = 0.0;
  long step = 0;
  double sup_norm = 0.0;
};

struct NormTrace {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> norm_q;
  std::vector<double> norm_dhalf;
  std::vector<double> norm_inf;
  std::vector<double> drift_sup;  // sup_x |chi grad c(t, x)|
};

struct SpectralSnapshot {
  double t = 0.0;
  std::vector<Cplx> rho_hat;
  std::vector<Cplx> c_hat;  // empty when c history is off
};

class PdeSolver {
 public:
  PdeSolver(const PdeConfig& cfg, const GaussianMixture& rho0, const GaussianMixture& c0);
  PdeSolver(const PdeConfig& cfg, const GridField& rho0, const GridField& c0);

  StepStatus step();
  // Runs to T (or blow-up).  Returns kBlowUp early with blowup_info set.
  StepStatus run();

  double time() const { return time_; }
  long step_count() const { return step_count_; }
  const PdeConfig& config() const { return cfg_; }
  const NormTrace& trace() const { return trace_; }
  const std::vector<SpectralSnapshot>& history() const { return history_; }
  const std::optional<BlowUpInfo>& blowup_info() const { return blowup_; }
  double min_density_seen() const { return min_rho_; }

  GridField density() const;
  GridField chemical() const;
  GridField chemical_gradient(int axis) const;
  double mass() const;
  double density_norm(NormOrder r) const;

  // c(t) rebuilt from the integral representation over the stored density
  // history (trapezoid in time, heat factors exact per mode).  t defaults to
  // the current time.
  GridField duhamel_c() const;

  // Relative L^r gap between the current density and its mild-equation
  // reconstruction from the stored history.  Requires c history.
  double mild_residual(NormOrder r) const;

 private:
  void init_common(const GridField& rho0, const GridField& c0);
  void nonlinear_term(const std::vector<Cplx>& rho_hat, const std::vector<Cplx>& c_hat,
                      std::vector<Cplx>& out, double* drift_sup, double* rho_min,
                      double* rho_sup) const;
  void record_norms(double drift_sup);
  void maybe_snapshot(bool force);

  PdeConfig cfg_;
  SpectralEngine engine_;
  std::optional<GaussianMixture> c0_mixture_;
  double time_ = 0.0;
  long step_count_ = 0;
  std::vector<Cplx> rho_hat_, c_hat_;
  std::vector<double> exp_rho_, exp_c_, phi1_rho_, phi1_c_, phi2_rho_, phi2_c_;
  NormTrace trace_;
  std::vector<SpectralSnapshot> history_;
  std::optional<BlowUpInfo> blowup_;
  double min_rho_ = 0.0;
};

// Per-order decay summary over a norm trace: plain sup for r <= d/2, weighted
// sup of t^{1 - d/(2r)} ||rho_t||_r otherwise.
struct DecayEntry {
  double r = 0.0;
  bool weighted = false;
  double exponent = 0.0;
  double sup_value = 0.0;
  double sup_time = 0.0;
};

DecayEntry decay_entry(const std::vector<double>& times, const std::vector<double>& norms,
                       int d, double r);

}  // namespace kslab
