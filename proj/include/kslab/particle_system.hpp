#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "kslab/fields.hpp"
#include "kslab/grid.hpp"

namespace kslab {

enum class DriftBackend { kPairwise, kMesh };

struct ParticleConfig {
  int d = 2;
  long n_particles = 1000;
  double dt = 1e-2;
  double T = 1.0;
  double chi = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;        // kernel mollification scale; > 0 unless cutoff set
  double delta_cutoff = 0.0;   // memory cutoff (skip lags < delta) when epsilon == 0
  bool chi_on_linear = true;   // chi multiplies the b0 term as well as the kernel term
  std::uint64_t seed = 1;
  int workers = 1;
  DriftBackend backend = DriftBackend::kPairwise;
  GridSpec mesh;               // required for kMesh
  bool dual_history = false;   // retain both slice representations (backend cross-checks)
  double history_window = 0.0; // keep all slices younger than this (0 -> T: keep all)
  int max_slices = 512;
  double kde_bandwidth_factor = 1.06;
};

struct KdeResult {
  GridField field;
  double bandwidth = 0.0;
  bool sparse_warning = false;  // fewer than 5 particles within h of the densest cell
};

// Kernel density estimate of a point cloud: cloud-in-cell deposit smoothed by
// a Gaussian of width h, renormalized to unit mass.
GridField kde_field(const double* pos, long n, int d, const GridSpec& grid, double h);

class ParticleSystem {
 public:
  ParticleSystem(const ParticleConfig& cfg, const GaussianMixture& rho0,
                 const GaussianMixture& c0);
  ~ParticleSystem();

  void advance();  // one Euler-Maruyama step
  void run();      // to T

  double time() const { return time_; }
  long step_count() const { return step_count_; }
  const ParticleConfig& config() const { return cfg_; }
  const std::vector<double>& positions() const { return pos_; }  // n*d, particle-major
  const std::vector<double>& last_drifts() const { return drift_; }
  double last_drift_sup() const;  // max_i |drift_i|
  int retained_slices() const { return static_cast<int>(slice_times_.size()); }

  std::vector<double> axis_variances() const;
  double bandwidth_rule() const;

  KdeResult empirical_density(const GridSpec& grid, double bandwidth = 0.0) const;

  // Drift field evaluation at the current time via the configured backend
  // (exposed so backends can be cross-checked on identical histories).
  void eval_drift(DriftBackend backend, std::vector<double>& out) const;

 private:
  void sample_initial(const GaussianMixture& rho0);
  void append_slice();
  void prune_slices();
  bool keep_positions() const;
  bool keep_mesh() const;
  long history_prefix() const;  // slices with lag >= the cutoff (all of them when mollified)
  std::vector<double> quad_weights(long count) const;  // trapezoid over the first count slice times
  void drift_pairwise(std::vector<double>& out) const;
  void drift_mesh(std::vector<double>& out) const;
  void add_linear_drift(std::vector<double>& out) const;
  void parallel_for(long n, const std::function<void(long, long)>& body) const;

  ParticleConfig cfg_;
  GaussianMixture c0_;
  double time_ = 0.0;
  long step_count_ = 0;
  std::vector<double> pos_;
  std::vector<double> drift_;
  std::vector<double> slice_times_;
  std::vector<long> slice_steps_;
  std::vector<std::vector<double>> slice_pos_;          // pairwise backend
  std::vector<std::vector<Cplx>> slice_rho_hat_;        // mesh backend
  std::unique_ptr<SpectralEngine> mesh_engine_;
};

}  // namespace kslab
