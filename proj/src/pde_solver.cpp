#include "kslab/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kslab {

namespace {

double phi1(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }
double phi2(double z) { return z == 0.0 ? 0.5 : (std::expm1(z) - z) / (z * z); }

GridField sample_mixture_grid(const GridSpec& spec, const GaussianMixture& m) {
  GridField f(spec);
  int n = spec.n, d = spec.d;
  double x[3] = {0.0, 0.0, 0.0};
  long total = spec.size();
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int a = d - 1; a >= 0; --a) {
      x[a] = spec.coord(static_cast<int>(rem % n));
      rem /= n;
    }
    f.data[idx] = m.value(x);
  }
  return f;
}

}  // namespace

PdeSolver::PdeSolver(const PdeConfig& cfg, const GaussianMixture& rho0,
                     const GaussianMixture& c0)
    : cfg_(cfg), engine_(cfg.grid) {
  if (rho0.d != cfg.grid.d || c0.d != cfg.grid.d)
    throw std::invalid_argument("PdeSolver: mixture dimension mismatch");
  GridField r0 = sample_mixture_grid(cfg.grid, rho0);
  double m0 = 0.0;
  for (double v : r0.data) m0 += v;
  m0 *= cfg.grid.cell_volume();
  if (!(m0 > 0.0)) throw std::invalid_argument("PdeSolver: initial density has no mass");
  for (double& v : r0.data) v /= m0;  // unit mass on the torus, exactly
  GridField cf0 = sample_mixture_grid(cfg.grid, c0);
  c0_mixture_ = c0;
  init_common(r0, cf0);
}

PdeSolver::PdeSolver(const PdeConfig& cfg, const GridField& rho0, const GridField& c0)
    : cfg_(cfg), engine_(cfg.grid) {
  if (!(rho0.spec == cfg.grid) || !(c0.spec == cfg.grid))
    throw std::invalid_argument("PdeSolver: field spec mismatch");
  init_common(rho0, c0);
}

void PdeSolver::init_common(const GridField& rho0, const GridField& c0) {
  if (!(cfg_.dt > 0.0) || !(cfg_.T > 0.0))
    throw std::domain_error("PdeSolver: dt > 0 and T > 0");
  if (cfg_.order != 1 && cfg_.order != 2)
    throw std::domain_error("PdeSolver: order must be 1 or 2");
  if (cfg_.snapshot_stride < 1 || cfg_.norm_stride < 1)
    throw std::domain_error("PdeSolver: strides >= 1");
  if (cfg_.norm_q <= 0.0) cfg_.norm_q = 1.5 * cfg_.grid.d;

  engine_.forward(rho0.data, rho_hat_);
  engine_.forward(c0.data, c_hat_);

  long cs = engine_.csize();
  exp_rho_.resize(cs);
  exp_c_.resize(cs);
  phi1_rho_.resize(cs);
  phi1_c_.resize(cs);
  phi2_rho_.resize(cs);
  phi2_c_.resize(cs);
  const auto& ksq = engine_.ksq();
  for (long i = 0; i < cs; ++i) {
    double zr = -0.5 * ksq[i] * cfg_.dt;
    double zc = (-0.5 * ksq[i] - cfg_.lambda) * cfg_.dt;
    exp_rho_[i] = std::exp(zr);
    exp_c_[i] = std::exp(zc);
    phi1_rho_[i] = phi1(zr);
    phi1_c_[i] = phi1(zc);
    phi2_rho_[i] = phi2(zr);
    phi2_c_[i] = phi2(zc);
  }

  double rmin = 0.0;
  for (double v : rho0.data) rmin = std::min(rmin, v);
  min_rho_ = rmin;

  maybe_snapshot(true);
  std::vector<Cplx> nl;
  double dsup = 0.0, rmn = 0.0, rsp = 0.0;
  nonlinear_term(rho_hat_, c_hat_, nl, &dsup, &rmn, &rsp);
  record_norms(dsup);
}

void PdeSolver::nonlinear_term(const std::vector<Cplx>& rho_hat,
                               const std::vector<Cplx>& c_hat, std::vector<Cplx>& out,
                               double* drift_sup, double* rho_min, double* rho_sup) const {
  const int d = cfg_.grid.d;
  const long cs = engine_.csize();
  std::vector<double> rho_real;
  engine_.backward(rho_hat, rho_real);
  if (rho_min || rho_sup) {
    double mn = rho_real[0], mx = rho_real[0];
    for (double v : rho_real) {
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    if (rho_min) *rho_min = mn;
    if (rho_sup) *rho_sup = std::max(std::fabs(mn), std::fabs(mx));
  }

  out.assign(cs, Cplx(0.0, 0.0));
  if (cfg_.chi == 0.0) {
    if (drift_sup) *drift_sup = 0.0;
    return;
  }

  long rsize = cfg_.grid.size();
  std::vector<double> grad_sq;
  if (drift_sup) grad_sq.assign(rsize, 0.0);
  std::vector<Cplx> work(cs);
  std::vector<double> dc, flux(rsize);
  for (int a = 0; a < d; ++a) {
    const auto& kg = engine_.kgrad(a);
    for (long i = 0; i < cs; ++i) work[i] = Cplx(0.0, kg[i]) * c_hat[i];
    engine_.backward(work, dc);
    if (drift_sup)
      for (long i = 0; i < rsize; ++i) grad_sq[i] += dc[i] * dc[i];
    for (long i = 0; i < rsize; ++i) flux[i] = rho_real[i] * dc[i];
    engine_.forward(flux, work);
    for (long i = 0; i < cs; ++i) out[i] -= cfg_.chi * Cplx(0.0, kg[i]) * work[i];
  }
  if (drift_sup) {
    double g2 = 0.0;
    for (long i = 0; i < rsize; ++i) g2 = std::max(g2, grad_sq[i]);
    *drift_sup = cfg_.chi * std::sqrt(g2);
  }
}

void PdeSolver::record_norms(double drift_sup) {
  if (step_count_ % cfg_.norm_stride != 0 &&
      std::fabs(time_ - cfg_.T) > 0.5 * cfg_.dt)
    return;
  GridField rho = density();
  double hv = cfg_.grid.cell_volume();
  double m = 0.0, sup = 0.0, nq = 0.0, nh = 0.0;
  double q = cfg_.norm_q, dh = 0.5 * cfg_.grid.d;
  for (double v : rho.data) {
    m += v;
    double av = std::fabs(v);
    sup = std::max(sup, av);
    nq += std::pow(av, q);
    nh += std::pow(av, dh);
  }
  trace_.times.push_back(time_);
  trace_.mass.push_back(m * hv);
  trace_.norm_q.push_back(std::pow(nq * hv, 1.0 / q));
  trace_.norm_dhalf.push_back(std::pow(nh * hv, 1.0 / dh));
  trace_.norm_inf.push_back(sup);
  trace_.drift_sup.push_back(drift_sup);
}

void PdeSolver::maybe_snapshot(bool force) {
  if (!force && step_count_ % cfg_.snapshot_stride != 0) return;
  if (!history_.empty() && history_.back().t == time_) return;
  SpectralSnapshot snap;
  snap.t = time_;
  snap.rho_hat = rho_hat_;
  if (cfg_.keep_c_history) snap.c_hat = c_hat_;
  history_.push_back(std::move(snap));
}

StepStatus PdeSolver::step() {
  const long cs = engine_.csize();
  std::vector<Cplx> nl;
  double drift_sup = 0.0, rho_min = 0.0, rho_sup = 0.0;
  nonlinear_term(rho_hat_, c_hat_, nl, &drift_sup, &rho_min, &rho_sup);

  if (!std::isfinite(rho_sup) || rho_sup > cfg_.blowup_sup_cap) {
    blowup_ = BlowUpInfo{time_, step_count_, rho_sup};
    return StepStatus::kBlowUp;
  }
  min_rho_ = std::min(min_rho_, rho_min);

  std::vector<Cplx> rho_next(cs);
  for (long i = 0; i < cs; ++i)
    rho_next[i] = exp_rho_[i] * rho_hat_[i] + cfg_.dt * phi1_rho_[i] * nl[i];

  if (cfg_.order == 2 && cfg_.chi != 0.0) {
    std::vector<Cplx> c_pred(cs);
    for (long i = 0; i < cs; ++i)
      c_pred[i] = exp_c_[i] * c_hat_[i] +
                  cfg_.dt * ((phi1_c_[i] - phi2_c_[i]) * rho_hat_[i] + phi2_c_[i] * rho_next[i]);
    std::vector<Cplx> nl2;
    nonlinear_term(rho_next, c_pred, nl2, nullptr, nullptr, nullptr);
    for (long i = 0; i < cs; ++i) rho_next[i] += cfg_.dt * phi2_rho_[i] * (nl2[i] - nl[i]);
  }

  std::vector<Cplx> c_next(cs);
  for (long i = 0; i < cs; ++i)
    c_next[i] = exp_c_[i] * c_hat_[i] +
                cfg_.dt * ((phi1_c_[i] - phi2_c_[i]) * rho_hat_[i] + phi2_c_[i] * rho_next[i]);

  rho_hat_ = std::move(rho_next);
  c_hat_ = std::move(c_next);
  step_count_ += 1;
  time_ = step_count_ * cfg_.dt;

  maybe_snapshot(false);
  double dsup2 = 0.0, rmn2 = 0.0, rsp2 = 0.0;
  bool want_norms = step_count_ % cfg_.norm_stride == 0 || time_ >= cfg_.T - 0.5 * cfg_.dt;
  if (want_norms) {
    std::vector<Cplx> scratch;
    nonlinear_term(rho_hat_, c_hat_, scratch, &dsup2, &rmn2, &rsp2);
    min_rho_ = std::min(min_rho_, rmn2);
    if (!std::isfinite(rsp2) || rsp2 > cfg_.blowup_sup_cap) {
      blowup_ = BlowUpInfo{time_, step_count_, rsp2};
      return StepStatus::kBlowUp;
    }
    record_norms(dsup2);
  }
  return StepStatus::kOk;
}

StepStatus PdeSolver::run() {
  long steps = static_cast<long>(std::llround(cfg_.T / cfg_.dt));
  if (std::fabs(steps * cfg_.dt - cfg_.T) > 1e-9 * cfg_.T)
    throw std::domain_error("PdeSolver: T must be an integer multiple of dt");
  while (step_count_ < steps) {
    if (step() == StepStatus::kBlowUp) return StepStatus::kBlowUp;
  }
  maybe_snapshot(true);
  return StepStatus::kOk;
}

GridField PdeSolver::density() const {
  GridField f(cfg_.grid);
  engine_.backward(rho_hat_, f.data);
  return f;
}

GridField PdeSolver::chemical() const {
  GridField f(cfg_.grid);
  engine_.backward(c_hat_, f.data);
  return f;
}

GridField PdeSolver::chemical_gradient(int axis) const {
  if (axis < 0 || axis >= cfg_.grid.d) throw std::invalid_argument("axis out of range");
  const long cs = engine_.csize();
  std::vector<Cplx> work(cs);
  const auto& kg = engine_.kgrad(axis);
  for (long i = 0; i < cs; ++i) work[i] = Cplx(0.0, kg[i]) * c_hat_[i];
  GridField f(cfg_.grid);
  engine_.backward(work, f.data);
  return f;
}

double PdeSolver::mass() const {
  GridField rho = density();
  double m = 0.0;
  for (double v : rho.data) m += v;
  return m * cfg_.grid.cell_volume();
}

double PdeSolver::density_norm(NormOrder r) const {
  GridField rho = density();
  double hv = cfg_.grid.cell_volume();
  if (r.is_infinite()) {
    double s = 0.0;
    for (double v : rho.data) s = std::max(s, std::fabs(v));
    return s;
  }
  double rv = r.value();
  double acc = 0.0;
  for (double v : rho.data) acc += std::pow(std::fabs(v), rv);
  return std::pow(acc * hv, 1.0 / rv);
}

GridField PdeSolver::duhamel_c() const {
  if (history_.empty()) throw std::logic_error("duhamel_c: no history");
  const long cs = engine_.csize();
  const auto& ksq = engine_.ksq();
  double t = time_;

  // homogeneous part
  std::vector<Cplx> acc(cs);
  if (c0_mixture_) {
    GaussianMixture flowed = t > 0.0 ? c0_mixture_->heat_convolved(t) : *c0_mixture_;
    GridField cf = sample_mixture_grid(cfg_.grid, flowed);
    std::vector<Cplx> chat0;
    engine_.forward(cf.data, chat0);
    double damp = std::exp(-cfg_.lambda * t);
    for (long i = 0; i < cs; ++i) acc[i] = damp * chat0[i];
  } else {
    const auto& first = history_.front();
    if (first.c_hat.empty()) throw std::logic_error("duhamel_c: c history required");
    double damp = std::exp(-cfg_.lambda * t);
    for (long i = 0; i < cs; ++i)
      acc[i] = damp * std::exp(-0.5 * ksq[i] * (t - first.t)) * first.c_hat[i];
  }

  // source integral: trapezoid over snapshots tau <= t plus the live state,
  // exact heat factors per mode
  SpectralSnapshot live;
  live.t = time_;
  std::vector<const SpectralSnapshot*> snaps;
  for (const auto& s : history_)
    if (s.t <= t + 1e-12) snaps.push_back(&s);
  if (!snaps.empty() && snaps.back()->t < t - 1e-12) {
    live.rho_hat = rho_hat_;
    snaps.push_back(&live);
  }
  size_t m = snaps.size();
  if (m >= 2) {
    for (size_t j = 0; j < m; ++j) {
      double tj = snaps[j]->t;
      double w;
      if (j == 0)
        w = 0.5 * (snaps[1]->t - snaps[0]->t);
      else if (j + 1 == m)
        w = 0.5 * (snaps[m - 1]->t - snaps[m - 2]->t);
      else
        w = 0.5 * (snaps[j + 1]->t - snaps[j - 1]->t);
      double lag = t - tj;
      double damp = std::exp(-cfg_.lambda * lag);
      const auto& rh = snaps[j]->rho_hat;
      for (long i = 0; i < cs; ++i)
        acc[i] += w * damp * std::exp(-0.5 * ksq[i] * lag) * rh[i];
    }
  }
  GridField out(cfg_.grid);
  engine_.backward(acc, out.data);
  return out;
}

double PdeSolver::mild_residual(NormOrder r) const {
  if (history_.size() < 2) throw std::logic_error("mild_residual: history too short");
  if (!cfg_.keep_c_history) throw std::logic_error("mild_residual: c history required");
  const long cs = engine_.csize();
  const auto& ksq = engine_.ksq();
  const int d = cfg_.grid.d;
  const long rsize = cfg_.grid.size();
  double t = time_;

  std::vector<Cplx> acc(cs);
  const auto& first = history_.front();
  for (long i = 0; i < cs; ++i)
    acc[i] = std::exp(-0.5 * ksq[i] * (t - first.t)) * first.rho_hat[i];

  SpectralSnapshot live;
  live.t = time_;
  std::vector<const SpectralSnapshot*> snaps;
  for (const auto& s : history_)
    if (s.t <= t + 1e-12) snaps.push_back(&s);
  if (!snaps.empty() && snaps.back()->t < t - 1e-12) {
    live.rho_hat = rho_hat_;
    live.c_hat = c_hat_;
    snaps.push_back(&live);
  }
  size_t m = snaps.size();

  std::vector<Cplx> work(cs), fhat(cs);
  std::vector<double> rho_real, dc, flux(rsize);
  for (size_t j = 0; j < m; ++j) {
    double tj = snaps[j]->t;
    double w;
    if (j == 0)
      w = 0.5 * (snaps[1]->t - snaps[0]->t);
    else if (j + 1 == m)
      w = 0.5 * (snaps[m - 1]->t - snaps[m - 2]->t);
    else
      w = 0.5 * (snaps[j + 1]->t - snaps[j - 1]->t);
    double lag = t - tj;
    engine_.backward(snaps[j]->rho_hat, rho_real);
    for (int a = 0; a < d; ++a) {
      const auto& kg = engine_.kgrad(a);
      for (long i = 0; i < cs; ++i) work[i] = Cplx(0.0, kg[i]) * snaps[j]->c_hat[i];
      engine_.backward(work, dc);
      for (long i = 0; i < rsize; ++i) flux[i] = rho_real[i] * dc[i];
      engine_.forward(flux, fhat);
      for (long i = 0; i < cs; ++i)
        acc[i] -= cfg_.chi * w * Cplx(0.0, kg[i]) * std::exp(-0.5 * ksq[i] * lag) * fhat[i];
    }
  }

  GridField recon(cfg_.grid);
  engine_.backward(acc, recon.data);
  GridField rho = density();
  double hv = cfg_.grid.cell_volume();
  if (r.is_infinite()) {
    double num = 0.0, den = 0.0;
    for (long i = 0; i < rsize; ++i) {
      num = std::max(num, std::fabs(rho.data[i] - recon.data[i]));
      den = std::max(den, std::fabs(rho.data[i]));
    }
    return num / den;
  }
  double rv = r.value();
  double num = 0.0, den = 0.0;
  for (long i = 0; i < rsize; ++i) {
    num += std::pow(std::fabs(rho.data[i] - recon.data[i]), rv);
    den += std::pow(std::fabs(rho.data[i]), rv);
  }
  return std::pow(num * hv, 1.0 / rv) / std::pow(den * hv, 1.0 / rv);
}

DecayEntry decay_entry(const std::vector<double>& times, const std::vector<double>& norms,
                       int d, double r) {
  if (times.size() != norms.size() || times.empty())
    throw std::invalid_argument("decay_entry: bad series");
  DecayEntry e;
  e.r = r;
  bool inf = std::isinf(r);
  double expo = inf ? 1.0 : 1.0 - d / (2.0 * r);
  e.weighted = inf || r > 0.5 * d;
  e.exponent = e.weighted ? expo : 0.0;
  double sup = -1.0, at = 0.0;
  for (size_t i = 0; i < times.size(); ++i) {
    double w = e.weighted ? (times[i] > 0.0 ? std::pow(times[i], e.exponent) : 0.0) : 1.0;
    double v = w * norms[i];
    if (v > sup) {
      sup = v;
      at = times[i];
    }
  }
  e.sup_value = sup;
  e.sup_time = at;
  return e;
}

}  // namespace kslab
