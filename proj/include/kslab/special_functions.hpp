#pragma once

#include <functional>
#include <stdexcept>

namespace kslab {

// L^r integrability order; r = infinity is carried as its own state, never a
// large-r stand-in.
class NormOrder {
 public:
  static NormOrder finite(double r) {
    if (!(r >= 1.0)) throw std::domain_error("NormOrder: r must be >= 1");
    return NormOrder(r, false);
  }
  static NormOrder infinity() { return NormOrder(0.0, true); }
  static NormOrder from_double(double r);

  bool is_infinite() const { return inf_; }
  double value() const {
    if (inf_) throw std::logic_error("NormOrder: infinite order has no value");
    return r_;
  }

 private:
  NormOrder(double r, bool inf) : r_(r), inf_(inf) {}
  double r_;
  bool inf_;
};

// Two conventions for the Gaussian norm constants C0(r), C1(r).  kQuadrature
// is the set matching the true L^r norms (validated against the quadrature
// oracle); kLegacy is an alternative closed-form normalization kept so that
// downstream constants can be reported under both.
enum class NormConvention { kQuadrature, kLegacy };

double gamma_fn(double x);
double log_gamma(double x);  // x > 0

// C0(r): ||g_t||_r = C0(r) / t^{(d/2)(1-1/r)} for the heat kernel g_t of
// variance t.  C1(r): ||d_i g_t||_r = C1(r) / t^{(d/2)(1-1/r)+1/2}.
double c0_const(int d, NormOrder r, NormConvention conv = NormConvention::kQuadrature);
double c1_const(int d, NormOrder r, NormConvention conv = NormConvention::kQuadrature);

double gaussian_lr_norm(int d, NormOrder r, double t);
double gaussian_grad_lr_norm(int d, NormOrder r, double t);

// beta(a,b) = int_0^1 u^{-a} (1-u)^{-b} du for a,b < 1.
double beta_integral(double a, double b);

struct QuadResult {
  double value;
  double error;
  int evaluations;
};

// Adaptive Gauss-Kronrod 7/15 on a finite interval.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-12, double abs_tol = 1e-300,
                     int max_intervals = 4000);

// Independent oracles (pure quadrature, no closed forms).
double gaussian_lr_norm_by_quadrature(int d, NormOrder r, double t, double rel_tol = 1e-11);
double gaussian_grad_lr_norm_by_quadrature(int d, NormOrder r, double t, double rel_tol = 1e-11);

// int_0^t s^{-a} (t-s)^{-b} ds by quadrature with endpoint substitutions
// s = t v^m (and mirrored), m chosen so the transformed integrand is C^1.
double singular_time_integral_by_quadrature(double a, double b, double t, double rel_tol = 1e-10);

// The same integral via the identity t^{1-(a+b)} beta(a,b).
double singular_time_integral(double a, double b, double t);

}  // namespace kslab
