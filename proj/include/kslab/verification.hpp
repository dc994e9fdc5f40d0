#pragma once

#include <string>
#include <vector>

#include "kslab/density_tools.hpp"
#include "kslab/model_constants.hpp"
#include "kslab/particle_system.hpp"
#include "kslab/pde_solver.hpp"

namespace kslab {

// One check outcome.  "pass"/"fail" verdicts are hard (they drive exit codes);
// "informational" marks measurements reported outside the regime where the
// bound is claimed.
struct VerificationReport {
  std::string check_id;
  std::string statement;   // what is being bounded or matched
  double predicted = 0.0;  // bound or target value
  double measured = 0.0;
  double tolerance = 0.0;  // relative slack applied to the bound or target
  std::string verdict;     // "pass", "fail" or "informational"
  std::string config_hash;
};

// measured <= bound * (1 + slack)
VerificationReport bound_report(const std::string& check_id, const std::string& statement,
                                double measured, double bound, double slack,
                                const std::string& config_hash, bool hard = true);
// |measured - target| <= rel_tol * max(|target|, floor)
VerificationReport match_report(const std::string& check_id, const std::string& statement,
                                double measured, double target, double rel_tol,
                                const std::string& config_hash, bool hard = true,
                                double floor = 1e-300);

bool any_hard_failure(const std::vector<VerificationReport>& reports);

std::string reports_to_json(const std::vector<VerificationReport>& reports);
std::vector<VerificationReport> reports_from_json(const std::string& text);

// Measured decay data for one run, on whichever representation produced it
// (spectral densities or kernel-density estimates of an ensemble).
struct DecayMeasurements {
  std::vector<double> times;
  std::vector<double> norm_q;      // || rho_t ||_q
  std::vector<double> norm_dhalf;  // || rho_t ||_{d/2}
  std::vector<double> drift_sup;   // sup_x |b(t, x)|, empty if not tracked
};

DecayMeasurements decay_from_trace(const NormTrace& trace);

// Checks the weighted-in-time q-norm functional against its fixed-point
// constant, the plain d/2-norm sup against the iterated interpolation bound,
// and the drift envelope against its explicit coefficient.  Verdicts are hard
// only when the smallness condition holds with d >= 3; otherwise the same
// numbers are reported informationally.
std::vector<VerificationReport> run_decay_check(const DecayMeasurements& m, const ModelParams& p,
                                                double decay_slack, double drift_slack,
                                                const std::string& config_hash);

struct CrossCheckOptions {
  double kde_l1_budget = 0.1;  // hard only for chi = 0 (pure diffusion oracle)
  double duhamel_rel_tol = 1e-3;
  std::uint64_t bootstrap_seed = 1;
  int bootstrap_resamples = 32;
  int workers = 1;
};

// Kernel-density estimate of an ensemble against the grid solution evolved
// from the same initial data: L1/L2 distances at the final time, the two-route
// chemical field comparison, and a bootstrap band for the L1 statistic.
struct CrossCheckResult {
  std::vector<VerificationReport> reports;
  double l1_distance = 0.0;
  double l2_distance = 0.0;
  double l1_noise_band = 0.0;  // bootstrap standard deviation of l1_distance
};

CrossCheckResult run_cross_check(const ParticleSystem& particles, PdeSolver& pde,
                                 const CrossCheckOptions& opt, const std::string& config_hash);

// Trend verdict for a distance-vs-ensemble-size study: each increase must stay
// within twice the local noise band.
VerificationReport trend_report(const std::vector<double>& sizes,
                                const std::vector<double>& distances,
                                const std::vector<double>& bands,
                                const std::string& config_hash);

// Bootstrap standard deviation of the L1 distance between a resampled kernel
// density estimate and a fixed reference field.
double bootstrap_l1_band(const std::vector<double>& pos, long n, int d,
                         const GridField& reference, double bandwidth, std::uint64_t seed,
                         int resamples);

}  // namespace kslab
