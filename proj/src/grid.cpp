#include "kslab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace kslab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

SpectralEngine::SpectralEngine(const GridSpec& spec) : spec_(spec) {
  if (spec.d < 1 || spec.d > 3) throw std::domain_error("SpectralEngine: d in {1,2,3}");
  if (spec.n < 8 || spec.n % 2 != 0)
    throw std::domain_error("SpectralEngine: n must be even and >= 8");
  if (!(spec.L > 0.0)) throw std::domain_error("SpectralEngine: L > 0");

  int n = spec.n, d = spec.d;
  long rsize = spec.size();
  int nh = n / 2 + 1;
  csize_ = rsize / n * nh;

  rbuf_ = static_cast<double*>(fftw_malloc(sizeof(double) * rsize));
  cbuf_ = fftw_malloc(sizeof(fftw_complex) * csize_);
  if (!rbuf_ || !cbuf_) throw std::bad_alloc();

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    int dims[3] = {n, n, n};
    plan_fwd_ = fftw_plan_dft_r2c(d, dims, rbuf_, static_cast<fftw_complex*>(cbuf_),
                                  FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r(d, dims, static_cast<fftw_complex*>(cbuf_), rbuf_,
                                  FFTW_ESTIMATE);
  }
  if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("SpectralEngine: plan failure");

  ksq_.assign(csize_, 0.0);
  for (int a = 0; a < d; ++a) kgrad_[a].assign(csize_, 0.0);
  double base = kTwoPi / spec.L;
  for (long ci = 0; ci < csize_; ++ci) {
    long rem = ci;
    int idx[3] = {0, 0, 0};
    idx[d - 1] = static_cast<int>(rem % nh);
    rem /= nh;
    for (int a = d - 2; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    double s = 0.0;
    for (int a = 0; a < d; ++a) {
      int m = idx[a];
      int folded = (a == d - 1) ? m : (m <= n / 2 ? m : m - n);
      double k = base * folded;
      s += k * k;
      kgrad_[a][ci] = (std::abs(folded) == n / 2) ? 0.0 : k;
    }
    ksq_[ci] = s;
  }
}

SpectralEngine::~SpectralEngine() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

void SpectralEngine::forward(const std::vector<double>& real_in,
                             std::vector<Cplx>& cplx_out) const {
  if (static_cast<long>(real_in.size()) != spec_.size())
    throw std::invalid_argument("forward: size mismatch");
  std::memcpy(rbuf_, real_in.data(), sizeof(double) * real_in.size());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), rbuf_,
                       static_cast<fftw_complex*>(cbuf_));
  cplx_out.resize(csize_);
  std::memcpy(cplx_out.data(), cbuf_, sizeof(fftw_complex) * csize_);
}

void SpectralEngine::backward(const std::vector<Cplx>& cplx_in,
                              std::vector<double>& real_out) const {
  if (static_cast<long>(cplx_in.size()) != csize_)
    throw std::invalid_argument("backward: size mismatch");
  std::memcpy(cbuf_, cplx_in.data(), sizeof(fftw_complex) * csize_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_),
                       static_cast<fftw_complex*>(cbuf_), rbuf_);
  long rsize = spec_.size();
  real_out.resize(rsize);
  double inv = 1.0 / rsize;
  for (long i = 0; i < rsize; ++i) real_out[i] = rbuf_[i] * inv;
}

namespace {

struct CicStencil {
  int base[3];
  double frac[3];
};

CicStencil cic_locate(const GridSpec& spec, const double* pos) {
  CicStencil st{};
  double h = spec.h();
  for (int a = 0; a < spec.d; ++a) {
    double u = (pos[a] + 0.5 * spec.L) / h;
    double fl = std::floor(u);
    st.frac[a] = u - fl;
    long cell = static_cast<long>(fl) % spec.n;
    if (cell < 0) cell += spec.n;
    st.base[a] = static_cast<int>(cell);
  }
  return st;
}

long flat_index(const GridSpec& spec, const int* idx) {
  long f = 0;
  for (int a = 0; a < spec.d; ++a) f = f * spec.n + idx[a];
  return f;
}

}  // namespace

void cic_deposit(GridField& field, const double* pos, double weight) {
  const GridSpec& spec = field.spec;
  CicStencil st = cic_locate(spec, pos);
  int corners = 1 << spec.d;
  double inv_cell = 1.0 / spec.cell_volume();
  for (int c = 0; c < corners; ++c) {
    double w = weight * inv_cell;
    int idx[3] = {0, 0, 0};
    for (int a = 0; a < spec.d; ++a) {
      int off = (c >> a) & 1;
      idx[a] = st.base[a] + off;
      if (idx[a] == spec.n) idx[a] = 0;
      w *= off ? st.frac[a] : 1.0 - st.frac[a];
    }
    field.data[flat_index(spec, idx)] += w;
  }
}

double cic_gather(const GridField& field, const double* pos) {
  const GridSpec& spec = field.spec;
  CicStencil st = cic_locate(spec, pos);
  int corners = 1 << spec.d;
  double v = 0.0;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    int idx[3] = {0, 0, 0};
    for (int a = 0; a < spec.d; ++a) {
      int off = (c >> a) & 1;
      idx[a] = st.base[a] + off;
      if (idx[a] == spec.n) idx[a] = 0;
      w *= off ? st.frac[a] : 1.0 - st.frac[a];
    }
    v += w * field.data[flat_index(spec, idx)];
  }
  return v;
}

double sample_periodic(const GridField& field, const double* x) { return cic_gather(field, x); }

}  // namespace kslab
