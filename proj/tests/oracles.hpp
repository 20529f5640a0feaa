#pragma once

// Reference computations for the tests, written independently of the
// library code paths they check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p1 = z, p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Composite Gauss-Legendre rule with `panels` equal panels of `order` nodes.
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64, int order = 20) {
  static thread_local int cached_order = -1;
  static thread_local std::pair<std::vector<double>, std::vector<double>> rule;
  if (cached_order != order) {
    rule = gauss_legendre(order);
    cached_order = order;
  }
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) s += rule.second[i] * f(lo + 0.5 * h * (rule.first[i] + 1.0));
  }
  return 0.5 * h * s;
}

/// Tensor Gauss-Legendre integral over [a,b]^2.
inline double integrate2(const std::function<double(double, double)>& f, double a, double b, int panels = 16,
                         int order = 12) {
  return integrate([&](double x) { return integrate([&](double y) { return f(x, y); }, a, b, panels, order); }, a, b,
                   panels, order);
}

/// Trigonometric basis straight from its definition.
inline double psi(int index, double t) {
  if (index == 0) return 1.0;
  const int k = (index + 1) / 2;
  const double a = 2.0 * std::numbers::pi * k * t;
  return std::sqrt(2.0) * (index % 2 == 1 ? std::cos(a) : std::sin(a));
}

/// Derivatives e^(0..order)(u) of e(u) = exp(-1 / (1 - 4u^2)) scaled by `s`
/// in the exponent (exp(s g(u))), from the exact derivatives of
/// g(u) = -(1/2)(1/(1-2u) + 1/(1+2u)) and the recurrence
/// y^(n+1) = sum_k C(n,k) (s g)^(k+1) y^(n-k).
inline std::vector<double> exp_bump_derivatives(double u, int order, double s = 1.0) {
  std::vector<double> y(order + 1, 0.0);
  if (std::abs(u) >= 0.5) return y;
  std::vector<double> g(order + 2);
  double fact = 1.0;
  for (int n = 0; n <= order + 1; ++n) {
    if (n > 0) fact *= n;
    const double a = fact * std::pow(2.0, n) / std::pow(1.0 - 2.0 * u, n + 1);
    const double b = fact * std::pow(-2.0, n) / std::pow(1.0 + 2.0 * u, n + 1);
    g[n] = -0.5 * s * (a + b);
  }
  y[0] = std::exp(g[0]);
  for (int n = 0; n < order; ++n) {
    double acc = 0.0, c = 1.0;
    for (int k = 0; k <= n; ++k) {
      acc += c * g[k + 1] * y[n - k];
      c = c * (n - k) / (k + 1);
    }
    y[n + 1] = acc;
  }
  return y;
}

/// Seeded fixture generator, independent of the library's RNG.
class Fixture {
public:
  explicit Fixture(std::uint64_t seed) : eng_(seed) {}
  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(eng_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng_); }
  double normal() { return std::normal_distribution<double>()(eng_); }
  std::mt19937_64& engine() { return eng_; }

private:
  std::mt19937_64 eng_;
};

}  // namespace oracle
