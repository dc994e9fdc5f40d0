#include "kslab/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace kslab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

void check_d(int d) {
  if (d < 1 || d > 3) throw std::domain_error("mixture: d must be 1, 2, or 3");
}

double sq_dist(int d, const double* x, const Vec3& mu) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    double z = x[i] - mu[i];
    s += z * z;
  }
  return s;
}

double sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / gamma_fn(0.5 * d); }

}  // namespace

double GaussianMixture::value(const double* x) const {
  double s = 0.0;
  for (const auto& c : components) {
    double amp = c.weight * std::pow(kTwoPi * c.var, -0.5 * d);
    s += amp * std::exp(-sq_dist(d, x, c.mean) / (2.0 * c.var));
  }
  return s;
}

void GaussianMixture::gradient(const double* x, double* out) const {
  for (int i = 0; i < d; ++i) out[i] = 0.0;
  for (const auto& c : components) {
    double amp = c.weight * std::pow(kTwoPi * c.var, -0.5 * d);
    double g = amp * std::exp(-sq_dist(d, x, c.mean) / (2.0 * c.var));
    for (int i = 0; i < d; ++i) out[i] -= g * (x[i] - c.mean[i]) / c.var;
  }
}

GaussianMixture GaussianMixture::heat_convolved(double t) const {
  if (t < 0.0) throw std::domain_error("heat_convolved: t >= 0");
  GaussianMixture m = *this;
  for (auto& c : m.components) c.var += t;
  return m;
}

double GaussianMixture::total_weight() const {
  double s = 0.0;
  for (const auto& c : components) s += c.weight;
  return s;
}

double GaussianMixture::max_var() const {
  double v = 0.0;
  for (const auto& c : components) v = std::max(v, c.var);
  return v;
}

double GaussianMixture::max_mean_abs() const {
  double v = 0.0;
  for (const auto& c : components)
    for (int i = 0; i < d; ++i) v = std::max(v, std::fabs(c.mean[i]));
  return v;
}

bool GaussianMixture::concentric() const {
  if (components.empty()) return true;
  for (const auto& c : components)
    for (int i = 0; i < d; ++i)
      if (c.mean[i] != components[0].mean[i]) return false;
  return true;
}

GaussianMixture standard_mixture(int d, double var) {
  check_d(d);
  GaussianMixture m;
  m.d = d;
  m.components.push_back({1.0, {0.0, 0.0, 0.0}, var});
  return m;
}

namespace {

// Radial 1-D reduction of || f ||_r for radial profiles f(|x|), plus the
// general grid fallback for non-concentric mixtures.

double radial_lr_norm(int d, double rv, double radius_scale,
                      const std::function<double(double)>& profile) {
  auto f = [&](double rho) {
    return std::pow(rho, d - 1) * std::pow(std::fabs(profile(rho)), rv);
  };
  double R = radius_scale;
  QuadResult q = integrate(f, 0.0, R, 1e-12);
  return std::pow(sphere_area(d) * q.value, 1.0 / rv);
}

double grid_lr_norm(const GaussianMixture& m, double rv, bool grad) {
  int d = m.d;
  double R = m.max_mean_abs() + 10.0 * std::sqrt(m.max_var());
  double prev = 0.0;
  int n_first = d == 3 ? 64 : 256;
  int n_last = d == 3 ? 256 : 2048;
  for (int n = n_first; n <= n_last; n *= 2) {
    double h = 2.0 * R / n;
    double sum = 0.0;
    std::array<double, 3> x{0.0, 0.0, 0.0};
    std::array<double, 3> gbuf{0.0, 0.0, 0.0};
    long total = 1;
    for (int i = 0; i < d; ++i) total *= n;
    for (long idx = 0; idx < total; ++idx) {
      long rem = idx;
      for (int i = 0; i < d; ++i) {
        x[i] = -R + (rem % n + 0.5) * h;
        rem /= n;
      }
      double v;
      if (grad) {
        m.gradient(x.data(), gbuf.data());
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += gbuf[i] * gbuf[i];
        v = std::sqrt(s);
      } else {
        v = std::fabs(m.value(x.data()));
      }
      sum += std::pow(v, rv);
    }
    double norm = std::pow(sum * std::pow(h, d), 1.0 / rv);
    if (n > n_first && std::fabs(norm - prev) <= 1e-9 * std::fabs(norm)) return norm;
    prev = norm;
  }
  return prev;
}

double sup_norm(const GaussianMixture& m, bool grad) {
  // coarse grid scan + local refinement
  int d = m.d;
  double R = m.max_mean_abs() + 6.0 * std::sqrt(m.max_var());
  double best = 0.0;
  std::array<double, 3> xb{0.0, 0.0, 0.0};
  auto eval = [&](const double* x) {
    if (!grad) return std::fabs(m.value(x));
    std::array<double, 3> g{};
    m.gradient(x, g.data());
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += g[i] * g[i];
    return std::sqrt(s);
  };
  int n = 161;
  double h = 2.0 * R / (n - 1);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  long total = 1;
  for (int i = 0; i < d; ++i) total *= n;
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int i = 0; i < d; ++i) {
      x[i] = -R + (rem % n) * h;
      rem /= n;
    }
    double v = eval(x.data());
    if (v > best) {
      best = v;
      xb = x;
    }
  }
  for (int pass = 0; pass < 40; ++pass) {
    h *= 0.55;
    bool moved = true;
    while (moved) {
      moved = false;
      for (int i = 0; i < d; ++i) {
        for (double s : {-1.0, 1.0}) {
          std::array<double, 3> xt = xb;
          xt[i] += s * h;
          double v = eval(xt.data());
          if (v > best) {
            best = v;
            xb = xt;
            moved = true;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace

double mixture_lr_norm(const GaussianMixture& m, NormOrder r) {
  check_d(m.d);
  if (m.components.empty()) return 0.0;
  if (r.is_infinite()) return sup_norm(m, false);
  double rv = r.value();
  if (m.components.size() == 1) {
    const auto& c = m.components[0];
    return std::fabs(c.weight) * gaussian_lr_norm(m.d, r, c.var);
  }
  if (m.concentric()) {
    const Vec3 mu = m.components[0].mean;
    double R = 14.0 * std::sqrt(m.max_var());
    auto profile = [&](double rho) {
      std::array<double, 3> x = mu;
      x[0] += rho;
      return m.value(x.data());
    };
    return radial_lr_norm(m.d, rv, R, profile);
  }
  return grid_lr_norm(m, rv, false);
}

double mixture_grad_lr_norm(const GaussianMixture& m, NormOrder r) {
  check_d(m.d);
  if (m.components.empty()) return 0.0;
  if (r.is_infinite()) return sup_norm(m, true);
  double rv = r.value();
  if (m.components.size() == 1) {
    const auto& c = m.components[0];
    // || |x|/v g_v ||_r^r = v^{-r} (2 pi v)^{-dr/2} S_{d-1}
    //                       Gamma((d+r)/2) / (2 (r/(2v))^{(d+r)/2})
    int d = m.d;
    double v = c.var;
    double mom = sphere_area(d) * gamma_fn(0.5 * (d + rv)) /
                 (2.0 * std::pow(rv / (2.0 * v), 0.5 * (d + rv)));
    double integral = std::pow(kTwoPi * v, -0.5 * d * rv) * mom;
    return std::fabs(c.weight) / v * std::pow(integral, 1.0 / rv);
  }
  if (m.concentric()) {
    const Vec3 mu = m.components[0].mean;
    double R = 14.0 * std::sqrt(m.max_var());
    auto profile = [&](double rho) {
      std::array<double, 3> x = mu;
      x[0] += rho;
      std::array<double, 3> g{};
      m.gradient(x.data(), g.data());
      double s = 0.0;
      for (int i = 0; i < m.d; ++i) s += g[i] * g[i];
      return std::sqrt(s);
    };
    return radial_lr_norm(m.d, rv, R, profile);
  }
  return grid_lr_norm(m, rv, true);
}

void kernel_eval(int d, double t, double lambda, double eps, const double* x, double* out) {
  check_d(d);
  if (t < 0.0 || eps < 0.0) throw std::domain_error("kernel_eval: t, eps >= 0");
  if (t == 0.0) {
    if (eps == 0.0) throw std::domain_error("kernel_eval: t = 0 needs eps > 0");
    for (int i = 0; i < d; ++i) out[i] = 0.0;
    return;
  }
  double r2 = 0.0;
  for (int i = 0; i < d; ++i) r2 += x[i] * x[i];
  // [t/(t+eps)]^{d/2+1} * (-x / ((2 pi t)^{d/2} t)) e^{-r2/2t - lambda t}
  //   = -x e^{-r2/2t - lambda t} / ((2 pi)^{d/2} (t+eps)^{d/2+1})
  double coef = -std::exp(-r2 / (2.0 * t) - lambda * t) /
                (std::pow(kTwoPi, 0.5 * d) * std::pow(t + eps, 0.5 * d + 1.0));
  for (int i = 0; i < d; ++i) out[i] = coef * x[i];
}

double kernel_component_lr_norm(int d, NormOrder r, double t, double lambda, double eps) {
  if (!(t > 0.0)) throw std::domain_error("kernel_component_lr_norm: t > 0");
  double factor = std::pow(t / (t + eps), 0.5 * d + 1.0) * std::exp(-lambda * t);
  return factor * gaussian_grad_lr_norm(d, r, t);
}

double kernel_difference_lr_norm(int d, NormOrder r, double t, double lambda, double eps) {
  if (!(t > 0.0)) throw std::domain_error("kernel_difference_lr_norm: t > 0");
  double factor = (1.0 - std::pow(t / (t + eps), 0.5 * d + 1.0)) * std::exp(-lambda * t);
  return factor * gaussian_grad_lr_norm(d, r, t);
}

void b0_drift(const GaussianMixture& c0, double t, double lambda, double eps,
              const double* x, double* out) {
  check_d(c0.d);
  if (t < 0.0 || eps < 0.0) throw std::domain_error("b0_drift: t, eps >= 0");
  if (t == 0.0) {
    if (eps > 0.0) {
      for (int i = 0; i < c0.d; ++i) out[i] = 0.0;
    } else {
      c0.gradient(x, out);
    }
    return;
  }
  GaussianMixture smoothed = c0.heat_convolved(t);
  smoothed.gradient(x, out);
  double factor = std::exp(-lambda * t);
  if (eps > 0.0) factor *= std::pow(t / (t + eps), 0.5 * c0.d);
  for (int i = 0; i < c0.d; ++i) out[i] *= factor;
}

double b0_mollification_gap(const GaussianMixture& c0, double t, double lambda, double eps) {
  if (!(t > 0.0)) return 0.0;
  GaussianMixture smoothed = c0.heat_convolved(t);
  double sup = mixture_grad_lr_norm(smoothed, NormOrder::infinity());
  return std::exp(-lambda * t) * (1.0 - std::pow(t / (t + eps), 0.5 * c0.d)) * sup;
}

}  // namespace kslab
