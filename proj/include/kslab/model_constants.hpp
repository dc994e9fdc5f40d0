#pragma once

#include <vector>

#include "kslab/special_functions.hpp"

namespace kslab {

struct ModelParams {
  int d = 3;
  double chi = 0.0;
  double lambda = 0.0;
  double T = 1.0;
  double q = 0.0;          // defaulted to 3d/2 when <= 0
  double norm_grad_c0 = 0.0;  // || |grad c0| ||_d
  double norm_rho0 = 0.0;     // ||rho0||_{d/2}

  double q_or_default() const { return q > 0.0 ? q : 1.5 * d; }
};

struct DerivedConstants {
  NormConvention convention = NormConvention::kQuadrature;
  double q = 0.0, q_prime = 0.0, q_tilde1 = 0.0, q_tilde2 = 0.0;
  double c1_qprime = 0.0, c1_one = 0.0, c0_qtilde1 = 0.0, c0_qtilde2 = 0.0;
  double K1 = 0.0, K2 = 0.0, A = 0.0, B = 0.0;
  double condition_lhs = 0.0;
  double margin = 0.0;
  bool condition_satisfied = false;
  bool cq_exists = false;
  double cq = 0.0;
  double cq_chi0_limit = 0.0;
  double polynomial_residual = 0.0;
  double uniqueness_lhs = 0.0;
  bool uniqueness_satisfied = false;
  bool informational = false;  // d < 3: formulas evaluated but verdicts advisory
};

// Requires d >= 2 and d < q < 2d.
DerivedConstants derive_constants(const ModelParams& p,
                                  NormConvention conv = NormConvention::kQuadrature);

double condition_lhs_at(const ModelParams& p, double chi,
                        NormConvention conv = NormConvention::kQuadrature);

// chi where the existence condition saturates, closed form (quadratic in
// sqrt(chi)); requires norm_grad_c0 > 0 or norm_rho0 > 0.
double chi_star(const ModelParams& p, NormConvention conv = NormConvention::kQuadrature);

struct BootstrapStep {
  double a_value = 0.0;       // A_n
  double a_prime_value = 0.0; // A'_n
  double exponent = 0.0;      // a_n
  double exponent_prime = 0.0;// a'_n
};

struct BootstrapSequence {
  double a0 = 0.0;            // starting interpolation constant A_0
  double exp0 = 0.0;          // a_0
  double beta_sixth = 0.0;
  std::vector<BootstrapStep> steps;  // n = 1..n_max
  double fixed_point = 0.0;   // largest positive fixed point y
  double bound = 0.0;         // max(A_1, y)
  double sup_norm_bound = 0.0;// limit bound on sup_{t<=1} ||rho_t||_{d/2}
  bool diverged = false;
};

// Iterates the two-level recursion at q = 3d/2.  A0 is the caller's starting
// constant; bootstrap_default_A0 supplies the interpolation value.
BootstrapSequence bootstrap_bound_sequence(const ModelParams& p, double cq, double A0,
                                           int n_max);
double bootstrap_default_A0(const ModelParams& p, double cq);

// Coefficient C in the drift envelope sup_x |b(t,x)| <= C / sqrt(t).
double drift_bound_coeff(const ModelParams& p, double cq,
                         NormConvention conv = NormConvention::kQuadrature);

}  // namespace kslab
