#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

namespace kslab {

// Periodic box [-L/2, L/2)^d sampled at n points per axis, row-major with the
// last axis fastest.  Grid nodes sit at x_j = -L/2 + j h, h = L/n.
struct GridSpec {
  int d = 1;
  int n = 0;
  double L = 1.0;

  long size() const {
    long s = 1;
    for (int i = 0; i < d; ++i) s *= n;
    return s;
  }
  double h() const { return L / n; }
  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= h();
    return v;
  }
  double coord(int j) const { return -0.5 * L + j * h(); }
  bool operator==(const GridSpec& o) const { return d == o.d && n == o.n && L == o.L; }
};

struct GridField {
  GridSpec spec;
  std::vector<double> data;

  GridField() = default;
  explicit GridField(const GridSpec& s) : spec(s), data(s.size(), 0.0) {}
};

using Cplx = std::complex<double>;

// FFTW-backed transforms for one GridSpec, with wavenumber tables.  ksq holds
// |k|^2 (Nyquist at its true magnitude); kgrad holds the derivative
// wavenumbers with the Nyquist mode zeroed so gradients of real fields stay
// conjugate-symmetric.
class SpectralEngine {
 public:
  explicit SpectralEngine(const GridSpec& spec);
  ~SpectralEngine();
  SpectralEngine(const SpectralEngine&) = delete;
  SpectralEngine& operator=(const SpectralEngine&) = delete;

  const GridSpec& spec() const { return spec_; }
  long csize() const { return csize_; }

  void forward(const std::vector<double>& real_in, std::vector<Cplx>& cplx_out) const;
  void backward(const std::vector<Cplx>& cplx_in, std::vector<double>& real_out) const;

  const std::vector<double>& ksq() const { return ksq_; }
  const std::vector<double>& kgrad(int axis) const { return kgrad_[axis]; }

 private:
  GridSpec spec_;
  long csize_;
  void* plan_fwd_;
  void* plan_bwd_;
  double* rbuf_;
  void* cbuf_;
  std::vector<double> ksq_;
  std::vector<double> kgrad_[3];
};

// Cloud-in-cell transfer between free-space particle positions and the
// periodic grid (positions wrap modulo L).
void cic_deposit(GridField& field, const double* pos, double weight);
double cic_gather(const GridField& field, const double* pos);

// Multilinear interpolation of a grid field at an arbitrary point (periodic).
double sample_periodic(const GridField& field, const double* x);

}  // namespace kslab
