#include "kslab/particle_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "kslab/density_tools.hpp"
#include "kslab/rng.hpp"

namespace kslab {

namespace {

constexpr uint64_t kStreamInit = 0;
constexpr uint64_t kStreamNoise = 1;

double half_power_two_pi(int d) {
  return std::pow(6.283185307179586476925286766559, 0.5 * d);
}

void check_mesh_spec(const GridSpec& g, int d) {
  if (g.d != d) throw std::invalid_argument("mesh dimension does not match particle dimension");
  if (g.n < 8 || g.n % 2 != 0) throw std::invalid_argument("mesh resolution must be even and >= 8");
  if (!(g.L > 0.0)) throw std::invalid_argument("mesh box size must be positive");
}

}  // namespace

ParticleSystem::ParticleSystem(const ParticleConfig& cfg, const GaussianMixture& rho0,
                               const GaussianMixture& c0)
    : cfg_(cfg), c0_(c0) {
  if (cfg_.d < 1 || cfg_.d > 3) throw std::invalid_argument("particle dimension must be 1, 2 or 3");
  if (cfg_.n_particles < 1) throw std::invalid_argument("need at least one particle");
  if (!(cfg_.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (cfg_.T < 0.0) throw std::invalid_argument("horizon must be nonnegative");
  if (cfg_.epsilon < 0.0 || cfg_.delta_cutoff < 0.0)
    throw std::invalid_argument("mollification and cutoff scales must be nonnegative");
  if (cfg_.chi != 0.0 && cfg_.epsilon == 0.0 && cfg_.delta_cutoff == 0.0)
    throw std::invalid_argument("interacting drift needs epsilon > 0 or a memory cutoff");
  if (cfg_.workers < 1) cfg_.workers = 1;
  if (cfg_.max_slices < 2) throw std::invalid_argument("max_slices must be at least 2");
  if (cfg_.history_window < 0.0) throw std::invalid_argument("history window must be nonnegative");
  if (rho0.d != cfg_.d) throw std::invalid_argument("initial density dimension mismatch");
  if (!c0_.components.empty() && c0_.d != cfg_.d)
    throw std::invalid_argument("chemical initial condition dimension mismatch");
  if (keep_mesh()) {
    check_mesh_spec(cfg_.mesh, cfg_.d);
    mesh_engine_ = std::make_unique<SpectralEngine>(cfg_.mesh);
  }

  pos_.resize(static_cast<size_t>(cfg_.n_particles) * cfg_.d);
  drift_.assign(pos_.size(), 0.0);
  sample_initial(rho0);
  append_slice();
}

ParticleSystem::~ParticleSystem() = default;

bool ParticleSystem::keep_positions() const {
  return cfg_.backend == DriftBackend::kPairwise || cfg_.dual_history;
}

bool ParticleSystem::keep_mesh() const {
  return cfg_.backend == DriftBackend::kMesh || cfg_.dual_history;
}

void ParticleSystem::sample_initial(const GaussianMixture& rho0) {
  if (rho0.components.empty()) throw std::invalid_argument("initial density has no components");
  double total = rho0.total_weight();
  if (!(total > 0.0)) throw std::invalid_argument("initial density weights must sum positive");
  std::vector<double> cdf(rho0.components.size());
  double acc = 0.0;
  for (size_t j = 0; j < rho0.components.size(); ++j) {
    const double w = rho0.components[j].weight;
    if (w < 0.0) throw std::invalid_argument("initial density weights must be nonnegative");
    acc += w;
    cdf[j] = acc;
  }
  const int d = cfg_.d;
  parallel_for(cfg_.n_particles, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      ParticleStream st(cfg_.seed, static_cast<uint64_t>(i));
      const double u = st.uniform(kStreamInit, 0, 0) * total;
      size_t pick = 0;
      while (pick + 1 < cdf.size() && cdf[pick] < u) ++pick;
      const MixtureComponent& comp = rho0.components[pick];
      const double sd = std::sqrt(comp.var);
      double z[3] = {0.0, 0.0, 0.0};
      st.gaussians(kStreamInit, 1, z, d);
      for (int a = 0; a < d; ++a) pos_[i * d + a] = comp.mean[a] + sd * z[a];
    }
  });
}

void ParticleSystem::append_slice() {
  slice_times_.push_back(time_);
  slice_steps_.push_back(step_count_);
  if (keep_positions()) slice_pos_.push_back(pos_);
  if (keep_mesh()) {
    GridField f(cfg_.mesh);
    const double w = 1.0 / static_cast<double>(cfg_.n_particles);
    const int d = cfg_.d;
    for (long i = 0; i < cfg_.n_particles; ++i) cic_deposit(f, &pos_[i * d], w);
    std::vector<Cplx> hat(mesh_engine_->csize());
    mesh_engine_->forward(f.data, hat);
    slice_rho_hat_.push_back(std::move(hat));
  }
}

void ParticleSystem::prune_slices() {
  const long m = static_cast<long>(slice_times_.size());
  const double window =
      cfg_.history_window > 0.0 ? cfg_.history_window : std::numeric_limits<double>::infinity();

  auto kept = [&](long l, int extra) {
    if (l == 0 || l == m - 1) return true;
    const double age = time_ - slice_times_[l];
    int level = extra;
    if (age > window) {
      level += static_cast<int>(std::ceil(std::log2(age / window)));
    } else if (extra == 0) {
      return true;
    }
    level = std::min(level, 40);
    const uint64_t modulus = uint64_t{1} << level;
    return static_cast<uint64_t>(slice_steps_[l]) % modulus == 0;
  };

  int extra = 0;
  long count = m;
  for (;;) {
    count = 0;
    for (long l = 0; l < m; ++l)
      if (kept(l, extra)) ++count;
    if (count <= cfg_.max_slices || extra >= 60) break;
    ++extra;
  }
  if (extra == 0 && count == m) return;

  std::vector<double> times;
  std::vector<long> steps;
  std::vector<std::vector<double>> spos;
  std::vector<std::vector<Cplx>> shat;
  times.reserve(count);
  steps.reserve(count);
  for (long l = 0; l < m; ++l) {
    if (!kept(l, extra)) continue;
    times.push_back(slice_times_[l]);
    steps.push_back(slice_steps_[l]);
    if (keep_positions()) spos.push_back(std::move(slice_pos_[l]));
    if (keep_mesh()) shat.push_back(std::move(slice_rho_hat_[l]));
  }
  slice_times_ = std::move(times);
  slice_steps_ = std::move(steps);
  slice_pos_ = std::move(spos);
  slice_rho_hat_ = std::move(shat);
}

long ParticleSystem::history_prefix() const {
  const double min_lag = cfg_.epsilon > 0.0 ? 0.0 : cfg_.delta_cutoff;
  const double tol = 1e-9 * cfg_.dt;
  long mr = 0;
  const long m = static_cast<long>(slice_times_.size());
  while (mr < m && time_ - slice_times_[mr] >= min_lag - tol) ++mr;
  return mr;
}

std::vector<double> ParticleSystem::quad_weights(long count) const {
  std::vector<double> w(count, 0.0);
  if (count < 2) return w;  // a single node carries no interval
  for (long j = 0; j < count; ++j) {
    const double left = j > 0 ? slice_times_[j] - slice_times_[j - 1] : 0.0;
    const double right = j + 1 < count ? slice_times_[j + 1] - slice_times_[j] : 0.0;
    w[j] = 0.5 * (left + right);
  }
  return w;
}

void ParticleSystem::drift_pairwise(std::vector<double>& out) const {
  const int d = cfg_.d;
  const long n = cfg_.n_particles;
  out.assign(static_cast<size_t>(n) * d, 0.0);

  const long mr = history_prefix();
  const std::vector<double> w = quad_weights(mr);

  struct SliceTerm {
    const double* pos;
    double coef;
    double inv2u;
  };
  std::vector<SliceTerm> terms;
  terms.reserve(mr);
  const double gpow = half_power_two_pi(d);
  for (long l = 0; l < mr; ++l) {
    const double u = time_ - slice_times_[l];
    if (u <= 0.0 || w[l] == 0.0) continue;
    const double coef =
        -w[l] * std::exp(-cfg_.lambda * u) / (gpow * std::pow(u + cfg_.epsilon, 0.5 * d + 1.0));
    terms.push_back({slice_pos_[l].data(), coef, 0.5 / u});
  }

  const double scale = cfg_.chi / static_cast<double>(n);
  parallel_for(n, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      const double* xi = &pos_[i * d];
      double acc[3] = {0.0, 0.0, 0.0};
      for (const SliceTerm& s : terms) {
        for (long j = 0; j < n; ++j) {
          const double* yj = s.pos + j * d;
          double dx[3] = {0.0, 0.0, 0.0};
          double r2 = 0.0;
          for (int a = 0; a < d; ++a) {
            dx[a] = xi[a] - yj[a];
            r2 += dx[a] * dx[a];
          }
          const double e = s.coef * std::exp(-r2 * s.inv2u);
          for (int a = 0; a < d; ++a) acc[a] += e * dx[a];
        }
      }
      for (int a = 0; a < d; ++a) out[i * d + a] = scale * acc[a];
    }
  });
  add_linear_drift(out);
}

void ParticleSystem::drift_mesh(std::vector<double>& out) const {
  const int d = cfg_.d;
  const long n = cfg_.n_particles;
  out.assign(static_cast<size_t>(n) * d, 0.0);

  const long mr = history_prefix();
  const std::vector<double> w = quad_weights(mr);
  const long cs = mesh_engine_->csize();
  const std::vector<double>& ksq = mesh_engine_->ksq();

  std::vector<long> live;
  std::vector<double> lag, factor;
  for (long l = 0; l < mr; ++l) {
    const double u = time_ - slice_times_[l];
    if (u <= 0.0 || w[l] == 0.0) continue;
    const double f =
        w[l] * std::pow(u / (u + cfg_.epsilon), 0.5 * d + 1.0) * std::exp(-cfg_.lambda * u);
    live.push_back(l);
    lag.push_back(u);
    factor.push_back(f);
  }

  std::vector<Cplx> sum(cs, Cplx(0.0, 0.0));
  parallel_for(cs, [&](long lo, long hi) {
    for (size_t t = 0; t < live.size(); ++t) {
      const std::vector<Cplx>& hat = slice_rho_hat_[live[t]];
      const double half_lag = 0.5 * lag[t];
      const double f = factor[t];
      for (long k = lo; k < hi; ++k) sum[k] += f * std::exp(-ksq[k] * half_lag) * hat[k];
    }
  });

  std::vector<GridField> conv;
  conv.reserve(d);
  std::vector<Cplx> tmp(cs);
  for (int a = 0; a < d; ++a) {
    const std::vector<double>& kg = mesh_engine_->kgrad(a);
    for (long k = 0; k < cs; ++k) tmp[k] = Cplx(0.0, kg[k]) * sum[k];
    conv.emplace_back(cfg_.mesh);
    mesh_engine_->backward(tmp, conv.back().data);
  }

  parallel_for(n, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i)
      for (int a = 0; a < d; ++a) out[i * d + a] = cfg_.chi * cic_gather(conv[a], &pos_[i * d]);
  });
  add_linear_drift(out);
}

void ParticleSystem::add_linear_drift(std::vector<double>& out) const {
  if (c0_.components.empty()) return;
  const double scale = cfg_.chi_on_linear ? cfg_.chi : 1.0;
  if (scale == 0.0) return;
  const int d = cfg_.d;
  parallel_for(cfg_.n_particles, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      double b[3] = {0.0, 0.0, 0.0};
      b0_drift(c0_, time_, cfg_.lambda, cfg_.epsilon, &pos_[i * d], b);
      for (int a = 0; a < d; ++a) out[i * d + a] += scale * b[a];
    }
  });
}

void ParticleSystem::eval_drift(DriftBackend backend, std::vector<double>& out) const {
  if (backend == DriftBackend::kPairwise) {
    if (!keep_positions()) throw std::logic_error("position history not retained");
    drift_pairwise(out);
  } else {
    if (!keep_mesh() || !mesh_engine_) throw std::logic_error("mesh history not retained");
    drift_mesh(out);
  }
}

void ParticleSystem::advance() {
  if (cfg_.chi != 0.0) {
    eval_drift(cfg_.backend, drift_);
  } else {
    drift_.assign(drift_.size(), 0.0);
    add_linear_drift(drift_);
  }

  const int d = cfg_.d;
  const double dt = cfg_.dt;
  const double sdt = std::sqrt(dt);
  const uint64_t step = static_cast<uint64_t>(step_count_);
  parallel_for(cfg_.n_particles, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      double z[3] = {0.0, 0.0, 0.0};
      ParticleStream st(cfg_.seed, static_cast<uint64_t>(i));
      st.gaussians(kStreamNoise, step, z, d);
      for (int a = 0; a < d; ++a) pos_[i * d + a] += dt * drift_[i * d + a] + sdt * z[a];
    }
  });

  ++step_count_;
  time_ = step_count_ * cfg_.dt;
  append_slice();
  prune_slices();
}

void ParticleSystem::run() {
  const double steps_real = cfg_.T / cfg_.dt;
  const long steps = std::lround(steps_real);
  if (std::abs(steps_real - steps) > 1e-9 * std::max(1.0, steps_real))
    throw std::invalid_argument("horizon must be an integer multiple of dt");
  while (step_count_ < steps) advance();
}

double ParticleSystem::last_drift_sup() const {
  const int d = cfg_.d;
  double best = 0.0;
  for (long i = 0; i < cfg_.n_particles; ++i) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += drift_[i * d + a] * drift_[i * d + a];
    best = std::max(best, r2);
  }
  return std::sqrt(best);
}

std::vector<double> ParticleSystem::axis_variances() const {
  const int d = cfg_.d;
  const long n = cfg_.n_particles;
  std::vector<double> var(d, 0.0);
  if (n < 2) return var;
  for (int a = 0; a < d; ++a) {
    double mean = 0.0;
    for (long i = 0; i < n; ++i) mean += pos_[i * d + a];
    mean /= n;
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
      const double dx = pos_[i * d + a] - mean;
      acc += dx * dx;
    }
    var[a] = acc / (n - 1);
  }
  return var;
}

double ParticleSystem::bandwidth_rule() const {
  const std::vector<double> var = axis_variances();
  double mean_var = 0.0;
  for (double v : var) mean_var += v;
  mean_var /= cfg_.d;
  const double sigma = std::sqrt(std::max(mean_var, 1e-300));
  return cfg_.kde_bandwidth_factor * sigma *
         std::pow(static_cast<double>(cfg_.n_particles), -1.0 / (cfg_.d + 4.0));
}

GridField kde_field(const double* pos, long n, int d, const GridSpec& grid, double h) {
  check_mesh_spec(grid, d);
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  GridField out(grid);
  const double w = 1.0 / static_cast<double>(n);
  for (long i = 0; i < n; ++i) cic_deposit(out, pos + i * d, w);

  SpectralEngine eng(grid);
  std::vector<Cplx> hat(eng.csize());
  eng.forward(out.data, hat);
  const std::vector<double>& ksq = eng.ksq();
  const double half_h2 = 0.5 * h * h;
  for (long k = 0; k < eng.csize(); ++k) hat[k] *= std::exp(-ksq[k] * half_h2);
  eng.backward(hat, out.data);

  const double mass = grid_mass(out);
  if (!(mass > 0.0)) throw std::runtime_error("smoothed empirical density lost its mass");
  for (double& v : out.data) v /= mass;
  return out;
}

KdeResult ParticleSystem::empirical_density(const GridSpec& grid, double bandwidth) const {
  const double h = bandwidth > 0.0 ? bandwidth : bandwidth_rule();
  const int d = cfg_.d;
  const long n = cfg_.n_particles;

  KdeResult res{kde_field(pos_.data(), n, d, grid, h), h, false};

  long dense = 0;
  for (long j = 1; j < grid.size(); ++j)
    if (res.field.data[j] > res.field.data[dense]) dense = j;
  double center[3] = {0.0, 0.0, 0.0};
  long rem = dense;
  for (int a = d - 1; a >= 0; --a) {
    center[a] = grid.coord(static_cast<int>(rem % grid.n));
    rem /= grid.n;
  }
  long nearby = 0;
  for (long i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      double dx = std::remainder(pos_[i * d + a] - center[a], grid.L);
      r2 += dx * dx;
    }
    if (r2 <= h * h) ++nearby;
  }
  res.sparse_warning = nearby < 5;
  return res;
}

void ParticleSystem::parallel_for(long n, const std::function<void(long, long)>& body) const {
  const int workers = cfg_.workers;
  if (workers <= 1 || n < 2 * workers) {
    body(0, n);
    return;
  }
  const long chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    const long lo = t * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace kslab
