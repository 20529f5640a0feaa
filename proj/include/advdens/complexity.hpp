#pragma once

// Capacity and rate bound calculators for piecewise-polynomial networks.
//
// Universal constants default to 1. Every log(x) is evaluated as
// log(max(x, 2)) so that small-argument edge cases stay positive.

#include <limits>

namespace advdens {

struct NetworkArch {
  long long weights = 1;  // W
  long long units = 1;    // U
  long long depth = 1;    // L
  long long pieces = 1;   // p, number of polynomial pieces of the activation
  long long degree = 1;   // maximal polynomial degree of the activation

  /// Throws std::invalid_argument unless all fields are positive and U >= L.
  void validate() const;
  bool operator==(const NetworkArch&) const = default;
};

/// log(max(x, 2)).
double floored_log(double x);

/// max(1, C (L W log(p U) + L^2 W log(degree))); the degree term is dropped for degree <= 1.
double vc_bound(const NetworkArch& arch, double c = 1.0);

struct LeakyArchCounts {
  NetworkArch f;   // discriminator class
  NetworkArch fg;  // discriminator composed with generator
};

/// Counts for the leaky-ReLU discriminator class realizing log-density
/// ratios of depth-L generators on R^d: W_F = 2(d^2 L + 2 d L) + 2,
/// U_F = 4 d L, depth L + 2; the composition adds d^2 L weights, d L units
/// and L layers.
LeakyArchCounts leaky_arch_counts(int d, int L);

/// d^2 L^2 log(d L), the order of Pdim(F) for the leaky construction.
double leaky_pdim_order(int d, int L);

/// (2 e M n / (eps pdim))^pdim.
double covering_bound(double pdim, double m_bound, double n, double eps);

/// C B sqrt(pdim log(n) / n).
double rademacher_bound(double pdim, double b, double n, double c = 1.0);

inline constexpr double kInfiniteSamples = std::numeric_limits<double>::infinity();

/// sqrt(pdim_F max(log m / m, log n / n)) v sqrt(pdim_FG log m / m).
/// Either sample size may be kInfiniteSamples.
double stochastic_error(double pdim_f, double pdim_fg, double n, double m);

/// C sqrt(d^2 L^2 log(d L) max(log m / m, log n / n)).
double leaky_rate_bound(int d, int L, double n, double m, double c = 1.0);

/// C sqrt(d^2 log d / n + (p d + d^2) log(p + d) / m).
double gaussian_rate_bound(int d, int p, double n, double m, double c = 1.0);

}  // namespace advdens
