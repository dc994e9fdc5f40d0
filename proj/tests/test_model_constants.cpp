#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "kslab/model_constants.hpp"

using namespace kslab;

namespace {

ModelParams reference_params(double chi) {
  ModelParams p;
  p.d = 3;
  p.q = 4.5;
  p.chi = chi;
  p.norm_grad_c0 = 1.0;
  p.norm_rho0 = 1.0;
  return p;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("exponent bookkeeping at d=3, q=4.5") {
  const DerivedConstants c = derive_constants(reference_params(0.01));
  CHECK(rel_err(c.q_prime, 9.0 / 7.0) < 1e-14);
  CHECK(rel_err(c.q_tilde1, 1.125) < 1e-14);
  CHECK(rel_err(c.q_tilde2, 1.8) < 1e-14);
}

TEST_CASE("frozen constant chain at d=3, q=4.5, unit norms") {
  const DerivedConstants c = derive_constants(reference_params(0.01));
  CHECK(std::abs(c.c1_qprime - 0.306667314922) < 1e-10);
  CHECK(std::abs(c.c0_qtilde1 - 0.629168047427) < 1e-10);
  CHECK(std::abs(c.c0_qtilde2 - 0.179950476166) < 1e-10);
  CHECK(std::abs(c.K1 - 35.7130916354) < 1e-8);
  CHECK(std::abs(c.K2 - 6.69465760688) < 1e-9);
  CHECK(rel_err(c.A, c.K2) < 1e-15);
  CHECK(std::abs(c.B - 5.07014313216) < 1e-9);
  CHECK(c.condition_satisfied);
  CHECK(c.cq_exists);
  CHECK(std::abs(c.cq - 0.2096919316) < 1e-9);
  CHECK(std::abs(c.uniqueness_lhs - 0.0402392834381397) < 1e-12);
  CHECK(!c.informational);

  const ModelParams p = reference_params(0.01);
  const BootstrapSequence bs = bootstrap_bound_sequence(p, c.cq, bootstrap_default_A0(p, c.cq), 50);
  REQUIRE(!bs.steps.empty());
  CHECK(std::abs(bs.steps[0].a_value - 0.37865102958850566) < 1e-12);
  CHECK(std::abs(bs.fixed_point - 0.3490572966873171) < 1e-12);
  CHECK(bs.bound == doctest::Approx(std::max(bs.steps[0].a_value, bs.fixed_point)));
}

TEST_CASE("fixed point satisfies its quadratic to near machine accuracy") {
  for (double chi : {1e-6, 1e-3, 0.01, 0.02}) {
    const DerivedConstants c = derive_constants(reference_params(chi));
    REQUIRE(c.cq_exists);
    CHECK(c.polynomial_residual < 1e-10);
  }
}

TEST_CASE("small coupling limit of the fixed point") {
  const DerivedConstants c = derive_constants(reference_params(1e-6));
  REQUIRE(c.cq_exists);
  CHECK(rel_err(c.cq, c.cq_chi0_limit) < 1e-4);
  CHECK(rel_err(c.cq_chi0_limit, c.c0_qtilde2) < 1e-12);  // unit initial norm
  CHECK(std::abs(c.cq - 0.179952837387) < 1e-10);
}

TEST_CASE("condition left side is strictly increasing in the coupling") {
  const ModelParams p = reference_params(0.0);
  double prev = -1.0;
  for (int i = 0; i < 20; ++i) {
    const double chi = 1e-4 + (0.05 - 1e-4) * i / 19.0;
    const double lhs = condition_lhs_at(p, chi);
    CHECK(lhs > prev);
    prev = lhs;
  }
}

TEST_CASE("threshold coupling saturates the condition") {
  const ModelParams p = reference_params(0.0);
  const double star = chi_star(p);
  CHECK(std::abs(star - 0.02637579826713602) < 1e-15);
  CHECK(std::abs(condition_lhs_at(p, star) - 1.0) < 1e-12);
  CHECK(condition_lhs_at(p, 0.99 * star) < 1.0);
  CHECK(condition_lhs_at(p, 1.01 * star) > 1.0);
  // bisection cross-check of the closed form
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (condition_lhs_at(p, mid) < 1.0 ? lo : hi) = mid;
  }
  CHECK(rel_err(star, lo) < 1e-12);
}

TEST_CASE("legacy convention yields a different but consistent chain") {
  const ModelParams p = reference_params(0.01);
  const DerivedConstants cq = derive_constants(p, NormConvention::kQuadrature);
  const DerivedConstants cl = derive_constants(p, NormConvention::kLegacy);
  CHECK(cl.condition_lhs != doctest::Approx(cq.condition_lhs));
  CHECK(cl.convention == NormConvention::kLegacy);
  if (cl.cq_exists) CHECK(cl.polynomial_residual < 1e-10);
}

TEST_CASE("domain guards") {
  ModelParams p = reference_params(0.01);
  p.q = 7.0;  // outside (d, 2d)
  CHECK_THROWS_AS(derive_constants(p), std::domain_error);
  p.q = 2.0;
  CHECK_THROWS_AS(derive_constants(p), std::domain_error);
  p = reference_params(0.01);
  p.d = 1;
  CHECK_THROWS_AS(derive_constants(p), std::domain_error);
  // d = 2 evaluates but marks its verdicts advisory
  p = reference_params(0.01);
  p.d = 2;
  p.q = 3.0;
  const DerivedConstants c2 = derive_constants(p);
  CHECK(c2.informational);
}

TEST_CASE("recursion stays below its fixed-point envelope") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int accepted = 0;
  while (accepted < 10) {
    ModelParams p;
    p.d = 3;
    p.q = 4.5;
    p.chi = 0.002 + 0.02 * unif(gen);
    p.norm_grad_c0 = 0.2 + 1.5 * unif(gen);
    p.norm_rho0 = 0.2 + 1.5 * unif(gen);
    const DerivedConstants c = derive_constants(p);
    if (!c.condition_satisfied || !c.cq_exists) continue;
    ++accepted;
    const BootstrapSequence bs =
        bootstrap_bound_sequence(p, c.cq, bootstrap_default_A0(p, c.cq), 200);
    REQUIRE(!bs.diverged);
    REQUIRE(bs.steps.size() == 200);
    for (const BootstrapStep& s : bs.steps)
      CHECK(s.a_value <= bs.bound * (1.0 + 1e-12));
    // exponent corrections halve exactly each step
    for (size_t n = 1; n < bs.steps.size(); ++n)
      CHECK(bs.steps[n].exponent_prime == 0.5 * bs.steps[n - 1].exponent_prime);
    CHECK(bs.sup_norm_bound >= p.norm_rho0);
    CHECK(std::isfinite(bs.sup_norm_bound));
  }
}

TEST_CASE("starting exponent at q = 3d/2") {
  ModelParams p = reference_params(0.01);
  const DerivedConstants c = derive_constants(p);
  const BootstrapSequence bs = bootstrap_bound_sequence(p, c.cq, bootstrap_default_A0(p, c.cq), 8);
  CHECK(rel_err(bs.exp0, 4.0 / 7.0) < 1e-14);
  CHECK(bs.a0 > 0.0);
}

TEST_CASE("drift envelope coefficient wiring") {
  const ModelParams p = reference_params(0.01);
  const DerivedConstants c = derive_constants(p);
  const double coeff = drift_bound_coeff(p, c.cq);
  const double expected =
      std::sqrt(3.0) * p.chi *
      (p.norm_grad_c0 * c0_const(3, NormOrder::finite(1.5)) +
       c.cq * c.c1_qprime * beta_integral(1.0 - 3.0 / 9.0, 3.0 / 9.0 + 0.5));
  CHECK(rel_err(coeff, expected) < 1e-12);
}
