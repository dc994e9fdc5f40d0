#pragma once

#include <array>
#include <vector>

#include "kslab/special_functions.hpp"

namespace kslab {

using Vec3 = std::array<double, 3>;

struct MixtureComponent {
  double weight = 1.0;
  Vec3 mean{0.0, 0.0, 0.0};
  double var = 1.0;  // scalar covariance var * I
};

// Finite Gaussian mixture on R^d, d in {1,2,3}.  Used for initial densities
// (weights > 0, sum 1) and for the chemical initial condition (weights free).
struct GaussianMixture {
  int d = 1;
  std::vector<MixtureComponent> components;

  double value(const double* x) const;
  void gradient(const double* x, double* out) const;
  GaussianMixture heat_convolved(double t) const;
  double total_weight() const;
  double max_var() const;
  double max_mean_abs() const;
  bool concentric() const;
};

GaussianMixture standard_mixture(int d, double var = 1.0);

// || m ||_r and || |grad m| ||_r.  Closed forms for single components and
// radial quadrature for concentric mixtures; general mixtures fall back to a
// refined grid rule (documented tolerance ~1e-8).
double mixture_lr_norm(const GaussianMixture& m, NormOrder r);
double mixture_grad_lr_norm(const GaussianMixture& m, NormOrder r);

// Interaction kernel K^eps_t(x) = [t/(t+eps)]^{d/2+1} e^{-lambda t} grad g_t(x),
// evaluated without the removable 0/0 at small t.  eps = 0 gives the raw kernel.
void kernel_eval(int d, double t, double lambda, double eps, const double* x, double* out);

// ||K^{eps,i}_t||_r (any component i) and the exact norm of K^eps_t - K_t,
// both scalar multiples of ||d_i g_t||_r.
double kernel_component_lr_norm(int d, NormOrder r, double t, double lambda, double eps);
double kernel_difference_lr_norm(int d, NormOrder r, double t, double lambda, double eps);

// Mollified linear drift b0^eps(t,x) = e^{-lambda t} (grad c0 * g^eps_t)(x);
// eps = 0 gives b0.  Exact Gaussian algebra (no quadrature).
void b0_drift(const GaussianMixture& c0, double t, double lambda, double eps,
              const double* x, double* out);

// sup_x |b0^eps(t,.) - b0(t,.)| for the mixture c0 (exact scalar-factor form).
double b0_mollification_gap(const GaussianMixture& c0, double t, double lambda, double eps);

}  // namespace kslab
