#include "kslab/model_constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kslab {

namespace {

void validate(const ModelParams& p) {
  if (p.d < 2) throw std::domain_error("derive_constants: d >= 2 required");
  double q = p.q_or_default();
  if (!(q > p.d && q < 2.0 * p.d))
    throw std::domain_error("derive_constants: q must lie in (d, 2d)");
  if (p.chi < 0.0 || p.norm_grad_c0 < 0.0 || p.norm_rho0 < 0.0)
    throw std::domain_error("derive_constants: chi and norms must be >= 0");
}

}  // namespace

DerivedConstants derive_constants(const ModelParams& p, NormConvention conv) {
  validate(p);
  DerivedConstants out;
  out.convention = conv;
  out.informational = p.d < 3;
  double d = p.d;
  double q = p.q_or_default();
  out.q = q;
  out.q_prime = q / (q - 1.0);
  out.q_tilde1 = d * q / ((d - 1.0) * q + d);
  out.q_tilde2 = d * q / (d + (d - 2.0) * q);

  out.c1_qprime = c1_const(p.d, NormOrder::finite(out.q_prime), conv);
  out.c1_one = c1_const(p.d, NormOrder::finite(1.0), conv);
  out.c0_qtilde1 = c0_const(p.d, NormOrder::finite(out.q_tilde1), conv);
  out.c0_qtilde2 = c0_const(p.d, NormOrder::finite(out.q_tilde2), conv);

  double beta_main = beta_integral(1.5 - d / q, d / (2.0 * q) + 0.5);
  double beta_half = beta_integral(1.0 - d / (2.0 * q), 0.5);
  out.K1 = d * out.c1_qprime * out.c1_one * beta_main * beta_half;
  out.K2 = d * out.c1_qprime * out.c0_qtilde1 * beta_main;
  out.A = out.K2;
  out.B = 2.0 * std::sqrt(out.c0_qtilde2 * out.K1);

  double n1 = p.norm_grad_c0, n2 = p.norm_rho0;
  out.condition_lhs = out.A * p.chi * n1 + out.B * std::sqrt(p.chi * n2);
  out.margin = 1.0 - out.condition_lhs;
  out.condition_satisfied = out.condition_lhs < 1.0;
  out.cq_chi0_limit = out.c0_qtilde2 * n2;

  // P(z) = K1 chi z^2 + (K2 chi n1 - 1) z + C0(qt2) n2; cq is its smallest
  // positive root, written in the cancellation-free form.
  if (p.chi == 0.0) {
    out.cq_exists = true;
    out.cq = out.cq_chi0_limit;
    out.polynomial_residual = 0.0;
  } else if (out.condition_satisfied) {
    double am = 1.0 - out.A * p.chi * n1;
    double disc = am * am - out.B * out.B * p.chi * n2;
    double denom = am + std::sqrt(std::max(disc, 0.0));
    out.cq_exists = true;
    out.cq = 2.0 * out.c0_qtilde2 * n2 / denom;
    double pval = out.K1 * p.chi * out.cq * out.cq + (out.K2 * p.chi * n1 - 1.0) * out.cq +
                  out.c0_qtilde2 * n2;
    double scale = std::max({out.K1 * p.chi * out.cq * out.cq,
                             std::fabs(out.K2 * p.chi * n1 - 1.0) * out.cq,
                             out.c0_qtilde2 * n2, 1e-300});
    out.polynomial_residual = pval / scale;
  } else {
    out.cq_exists = false;
    out.cq = std::numeric_limits<double>::quiet_NaN();
    out.polynomial_residual = std::numeric_limits<double>::quiet_NaN();
  }

  if (out.cq_exists) {
    double beta_u = beta_integral(d / (2.0 * q) + 0.5, 1.0 - d / (2.0 * q));
    out.uniqueness_lhs = p.chi * out.c1_one * beta_integral(0.5, 0.5) *
                         (n1 + out.cq * out.c1_qprime * (beta_u + 1.0));
    out.uniqueness_satisfied = out.uniqueness_lhs < 1.0;
  } else {
    out.uniqueness_lhs = std::numeric_limits<double>::quiet_NaN();
    out.uniqueness_satisfied = false;
  }
  return out;
}

double condition_lhs_at(const ModelParams& p, double chi, NormConvention conv) {
  ModelParams pc = p;
  pc.chi = chi;
  return derive_constants(pc, conv).condition_lhs;
}

double chi_star(const ModelParams& p, NormConvention conv) {
  ModelParams pc = p;
  pc.chi = 0.0;
  DerivedConstants c = derive_constants(pc, conv);
  double n1 = p.norm_grad_c0, n2 = p.norm_rho0;
  double a = c.A * n1, b = c.B * std::sqrt(n2);
  // a u^2 + b u = 1 with u = sqrt(chi)
  if (a == 0.0 && b == 0.0) throw std::domain_error("chi_star: both norms vanish");
  double u = a == 0.0 ? 1.0 / b : (-b + std::sqrt(b * b + 4.0 * a)) / (2.0 * a);
  return u * u;
}

namespace {

// Largest positive root of x^4 - c2 x^2 - c1 x - c0 (c_i >= 0, not all zero)
// by rightmost-bracket bisection.
double largest_quartic_fixed_point(double c2, double c1, double c0) {
  auto g = [&](double x) { return ((x * x - c2) * x - c1) * x - c0; };
  double hi = 1.0 + std::sqrt(c2) + std::cbrt(c1) + std::sqrt(std::sqrt(c0));
  while (g(hi) <= 0.0) hi *= 2.0;
  const int kGrid = 4096;
  double lo = 0.0;
  for (int i = kGrid - 1; i >= 0; --i) {
    double x = hi * i / kGrid;
    if (g(x) <= 0.0) {
      lo = x;
      hi = hi * (i + 1) / kGrid;
      break;
    }
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g(mid) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double bootstrap_default_A0(const ModelParams& p, double cq) {
  double d = p.d;
  double q = 1.5 * d;
  double th_half = (1.0 - 2.0 / d) / (1.0 - 1.0 / q);
  double th_d = (1.0 - 1.0 / d) / (1.0 - 1.0 / q);
  return std::max(std::pow(cq, th_half), std::pow(cq, th_d));
}

BootstrapSequence bootstrap_bound_sequence(const ModelParams& p, double cq, double A0,
                                           int n_max) {
  if (p.d < 3) throw std::domain_error("bootstrap: d >= 3 required");
  double q = p.q_or_default();
  if (std::fabs(q - 1.5 * p.d) > 1e-12)
    throw std::domain_error("bootstrap: recursion is stated at q = 3d/2");
  if (!(cq > 0.0) || !(A0 > 0.0) || n_max < 1)
    throw std::domain_error("bootstrap: cq > 0, A0 > 0, n_max >= 1");

  BootstrapSequence seq;
  double d = p.d;
  seq.beta_sixth = beta_integral(5.0 / 6.0, 5.0 / 6.0);
  double bs = seq.beta_sixth;
  seq.a0 = A0;
  seq.exp0 = (2.0 / 3.0) * (1.0 - 1.0 / d) / (1.0 - 2.0 / (3.0 * d));

  auto ap_map = [&](double x) {
    return p.norm_rho0 + d * p.chi * p.norm_grad_c0 * bs * x + d * p.chi * bs * bs * x * x;
  };

  double cq3 = cq * cq * cq;
  seq.fixed_point = largest_quartic_fixed_point(cq3 * d * p.chi * bs * bs,
                                                cq3 * d * p.chi * p.norm_grad_c0 * bs,
                                                cq3 * p.norm_rho0);

  double an = A0;
  double eprime = 2.0 * seq.exp0 - 1.0;  // a'_1
  seq.steps.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) {
    double apn = ap_map(an);
    an = std::pow(apn, 0.25) * std::pow(cq, 0.75);
    BootstrapStep st;
    st.a_prime_value = apn;
    st.a_value = an;
    st.exponent_prime = eprime;
    st.exponent = eprime / 4.0 + 0.5;
    seq.steps.push_back(st);
    eprime /= 2.0;
    if (!std::isfinite(an) || an > 1e12) {
      seq.diverged = true;
      break;
    }
  }
  double a1 = seq.steps.front().a_value;
  seq.bound = std::max(a1, seq.fixed_point);
  seq.sup_norm_bound = ap_map(seq.bound);
  return seq;
}

double drift_bound_coeff(const ModelParams& p, double cq, NormConvention conv) {
  double d = p.d;
  double q = p.q_or_default();
  double q_prime = q / (q - 1.0);
  double d_conj = d / (d - 1.0);
  double c0d = c0_const(p.d, NormOrder::finite(d_conj), conv);
  double c1qp = c1_const(p.d, NormOrder::finite(q_prime), conv);
  double beta_tail = beta_integral(1.0 - d / (2.0 * q), d / (2.0 * q) + 0.5);
  return std::sqrt(d) * p.chi * (p.norm_grad_c0 * c0d + cq * c1qp * beta_tail);
}

}  // namespace kslab
