#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "kslab/fields.hpp"
#include "kslab/special_functions.hpp"

using namespace kslab;

namespace {

GaussianMixture bimodal2d() {
  GaussianMixture m;
  m.d = 2;
  m.components.push_back({0.6, {0.8, -0.3, 0.0}, 0.7});
  m.components.push_back({0.4, {-1.1, 0.5, 0.0}, 1.3});
  return m;
}

}  // namespace

TEST_CASE("kernel value at a frozen point") {
  // d=1, t=1, lambda=0, eps=0, x=1: derivative of the heat kernel
  double x[1] = {1.0};
  double out[1] = {0.0};
  kernel_eval(1, 1.0, 0.0, 0.0, x, out);
  CHECK(std::abs(out[0] - (-0.2419707245191434)) < 1e-14);
}

TEST_CASE("kernel equals damped gradient of the heat kernel") {
  const double t = 0.7, lambda = 0.4, fd = 1e-6;
  for (int d = 1; d <= 3; ++d) {
    double x[3] = {0.4, -0.2, 0.9};
    double k[3] = {0.0, 0.0, 0.0};
    kernel_eval(d, t, lambda, 0.0, x, k);
    for (int ax = 0; ax < d; ++ax) {
      auto gt = [&](double shift) {
        double r2 = 0.0;
        for (int j = 0; j < d; ++j) {
          const double xj = x[j] + (j == ax ? shift : 0.0);
          r2 += xj * xj;
        }
        return std::exp(-r2 / (2.0 * t)) / std::pow(2.0 * M_PI * t, 0.5 * d);
      };
      const double grad = (gt(fd) - gt(-fd)) / (2.0 * fd);
      CHECK(std::abs(k[ax] - std::exp(-lambda * t) * grad) < 1e-8);
    }
  }
}

TEST_CASE("regularization rescales the kernel by a known factor") {
  const double t = 0.5, eps = 0.2, lambda = 0.3;
  double x[3] = {0.6, -0.4, 0.2};
  for (int d = 1; d <= 3; ++d) {
    double raw[3] = {0, 0, 0}, reg[3] = {0, 0, 0};
    kernel_eval(d, t, lambda, 0.0, x, raw);
    kernel_eval(d, t, lambda, eps, x, reg);
    const double factor = std::pow(t / (t + eps), 0.5 * d + 1.0);
    for (int ax = 0; ax < d; ++ax)
      CHECK(std::abs(reg[ax] - factor * raw[ax]) < 1e-14);
  }
  // at t = 0 the regularized kernel vanishes identically
  double at0[2] = {1.0, 1.0};
  kernel_eval(2, 0.0, lambda, eps, x, at0);
  CHECK(at0[0] == 0.0);
  CHECK(at0[1] == 0.0);
}

TEST_CASE("kernel component norms obey the scaling bound") {
  for (int d : {1, 2, 3}) {
    for (double r : {1.0, 2.0}) {
      for (double t : {0.3, 1.0, 4.0}) {
        for (double eps : {0.0, 0.1}) {
          const double got = kernel_component_lr_norm(d, NormOrder::finite(r), t, 0.0, eps);
          const double cap = c1_const(d, NormOrder::finite(r)) /
                             std::pow(t + eps, 0.5 * d * (1.0 - 1.0 / r) + 0.5);
          CHECK(got <= cap * (1.0 + 1e-12));
          if (eps == 0.0) CHECK(got == doctest::Approx(cap).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("mollification gap closes as the regularization vanishes") {
  const int d = 2;
  const double t = 0.8, lambda = 0.2;
  const NormOrder r = NormOrder::finite(1.0);
  double prev = kernel_difference_lr_norm(d, r, t, lambda, 0.4);
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    const double cur = kernel_difference_lr_norm(d, r, t, lambda, eps);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(kernel_difference_lr_norm(d, r, t, lambda, 0.0) == 0.0);
  // the regularized kernel is a scalar multiple of the raw one, so the gap
  // norm is exactly the difference of the component norms
  const double eps = 0.15;
  const double base = kernel_component_lr_norm(d, r, t, lambda, 0.0);
  const double reg = kernel_component_lr_norm(d, r, t, lambda, eps);
  CHECK(std::abs(kernel_difference_lr_norm(d, r, t, lambda, eps) - (base - reg)) < 1e-13);
}

TEST_CASE("initial drift envelope") {
  GaussianMixture c0;
  c0.d = 3;
  c0.components.push_back({1.0, {0.0, 0.0, 0.0}, 1.0});
  const double grad_norm = mixture_grad_lr_norm(c0, NormOrder::finite(3.0));
  const double cap_coef = c0_const(3, NormOrder::finite(1.5)) * grad_norm;
  for (double t : {0.05, 0.2, 1.0, 3.0}) {
    double sup = 0.0;
    for (double s = -3.0; s <= 3.0; s += 0.5) {
      double x[3] = {s, 0.3 * s, -0.2 * s};
      double b[3] = {0, 0, 0};
      b0_drift(c0, t, 0.0, 0.0, x, b);
      sup = std::max(sup, std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]));
    }
    CHECK(sup <= cap_coef / std::sqrt(t) * (1.0 + 1e-9));
  }
}

TEST_CASE("initial drift mollification is a scalar rescale") {
  GaussianMixture c0;
  c0.d = 2;
  c0.components.push_back({1.0, {0.3, -0.2, 0.0}, 0.9});
  const double t = 0.6, eps = 0.25, lambda = 0.5;
  double x[2] = {0.7, 0.1};
  double raw[2] = {0, 0}, reg[2] = {0, 0};
  b0_drift(c0, t, lambda, 0.0, x, raw);
  b0_drift(c0, t, lambda, eps, x, reg);
  const double factor = std::pow(t / (t + eps), 0.5 * c0.d);
  for (int ax = 0; ax < 2; ++ax)
    CHECK(std::abs(reg[ax] - factor * raw[ax]) < 1e-14);
  const double gap = b0_mollification_gap(c0, t, lambda, eps);
  CHECK(gap > 0.0);
  CHECK(b0_mollification_gap(c0, t, lambda, 0.0) == 0.0);
  // gap must dominate the pointwise difference
  const double diff = std::hypot(raw[0] - reg[0], raw[1] - reg[1]);
  CHECK(diff <= gap * (1.0 + 1e-12));
}

TEST_CASE("mixture value integrates to total weight") {
  const GaussianMixture m = bimodal2d();
  const int n = 400;
  const double L = 20.0, h = L / n;
  double mass = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double x[2] = {-0.5 * L + (i + 0.5) * h, -0.5 * L + (j + 0.5) * h};
      mass += m.value(x);
    }
  mass *= h * h;
  CHECK(std::abs(mass - m.total_weight()) < 1e-8);
}

TEST_CASE("mixture gradient matches finite differences") {
  const GaussianMixture m = bimodal2d();
  const double fd = 1e-6;
  double x[2] = {0.35, -0.8};
  double g[2] = {0, 0};
  m.gradient(x, g);
  for (int ax = 0; ax < 2; ++ax) {
    double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]};
    xp[ax] += fd;
    xm[ax] -= fd;
    CHECK(std::abs(g[ax] - (m.value(xp) - m.value(xm)) / (2.0 * fd)) < 1e-8);
  }
}

TEST_CASE("heat convolution shifts the variances") {
  const GaussianMixture m = bimodal2d();
  const double t = 0.9;
  const GaussianMixture conv = m.heat_convolved(t);
  REQUIRE(conv.components.size() == m.components.size());
  for (size_t i = 0; i < m.components.size(); ++i) {
    CHECK(conv.components[i].var == doctest::Approx(m.components[i].var + t).epsilon(1e-15));
    CHECK(conv.components[i].weight == m.components[i].weight);
  }
  // semigroup property through values
  double x[2] = {0.4, 0.2};
  const GaussianMixture two = m.heat_convolved(0.4).heat_convolved(0.5);
  CHECK(std::abs(two.value(x) - conv.value(x)) < 1e-14);
}

TEST_CASE("single gaussian norms match the closed form") {
  GaussianMixture m = standard_mixture(3, 1.0);
  const int d = 3;
  for (double r : {1.0, 2.0, 3.0}) {
    const double got = mixture_lr_norm(m, NormOrder::finite(r));
    // a unit-mass gaussian with variance v has the norms of the heat kernel at t = v
    const double want = gaussian_lr_norm(d, NormOrder::finite(r), 1.0);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
    // the mixture norm takes the magnitude of the full gradient; the closed
    // form is per component.  For a radial profile they differ by the r-th
    // directional moment of a unit vector.
    const double moment = std::tgamma(0.5 * (r + 1.0)) * std::tgamma(0.5 * d) /
                          (std::sqrt(M_PI) * std::tgamma(0.5 * (d + r)));
    const double gotg = mixture_grad_lr_norm(m, NormOrder::finite(r));
    const double wantg =
        gaussian_grad_lr_norm(d, NormOrder::finite(r), 1.0) * std::pow(moment, -1.0 / r);
    CHECK(gotg == doctest::Approx(wantg).epsilon(1e-8));
  }
  CHECK(mixture_lr_norm(m, NormOrder::infinity()) ==
        doctest::Approx(gaussian_lr_norm(d, NormOrder::infinity(), 1.0)).epsilon(1e-10));
}

TEST_CASE("off-center mixture norms agree with a brute-force grid") {
  const GaussianMixture m = bimodal2d();
  const int n = 600;
  const double L = 24.0, h = L / n;
  for (double r : {1.5, 2.0}) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double x[2] = {-0.5 * L + (i + 0.5) * h, -0.5 * L + (j + 0.5) * h};
        acc += std::pow(m.value(x), r);
      }
    const double grid = std::pow(acc * h * h, 1.0 / r);
    CHECK(std::abs(mixture_lr_norm(m, NormOrder::finite(r)) - grid) < 2e-4);
  }
}

TEST_CASE("concentric detection") {
  GaussianMixture m;
  m.d = 2;
  m.components.push_back({0.5, {0.0, 0.0, 0.0}, 1.0});
  m.components.push_back({0.5, {0.0, 0.0, 0.0}, 2.0});
  CHECK(m.concentric());
  CHECK(!bimodal2d().concentric());
  CHECK(m.max_var() == doctest::Approx(2.0));
}
