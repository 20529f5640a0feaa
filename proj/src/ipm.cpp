#include "advdens/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advdens/rng.hpp"

namespace advdens {
namespace {

void check_dims(const CoefficientMap& a, const CoefficientMap& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("coefficient maps have different dimensions");
}

// (index, scaled difference w^-1/2 (a - b)) over the nonzero part of the union.
std::vector<double> scaled_difference(const CoefficientMap& a, const CoefficientMap& b, const WeightSequence& w) {
  check_dims(a, b);
  const int cutoff = std::max(a.cutoff(), b.cutoff());
  const CoefficientMap ea = a.cutoff() == cutoff ? a : a.with_cutoff(cutoff);
  const CoefficientMap eb = b.cutoff() == cutoff ? b : b.with_cutoff(cutoff);
  std::vector<double> out;
  for (std::size_t j = 0; j < ea.size(); ++j) {
    const double diff = ea.values()[j] - eb.values()[j];
    if (diff != 0.0) out.push_back(diff / std::sqrt(w(ea.index_of(j))));
  }
  return out;
}

}  // namespace

double ipm_closed_form(const CoefficientMap& a, const CoefficientMap& b, const WeightSequence& w) {
  check_dims(a, b);
  const int cutoff = std::max(a.cutoff(), b.cutoff());
  double s = 0.0;
  if (a.cutoff() == b.cutoff()) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double diff = a.values()[j] - b.values()[j];
      if (diff != 0.0) s += diff * diff / w(a.index_of(j));
    }
    return std::sqrt(s);
  }
  const CoefficientMap& big = a.cutoff() == cutoff ? a : b;
  const CoefficientMap& small = a.cutoff() == cutoff ? b : a;
  const double sign = a.cutoff() == cutoff ? 1.0 : -1.0;
  for (std::size_t j = 0; j < big.size(); ++j) {
    const MultiIndex idx = big.index_of(j);
    const double diff = sign * (big.values()[j] - small[idx]);
    if (diff != 0.0) s += diff * diff / w(idx);
  }
  return std::sqrt(s);
}

double ipm_bruteforce(const CoefficientMap& a, const CoefficientMap& b, const WeightSequence& w,
                      const BruteForceOptions& options) {
  // In coordinates u = w^1/2 f the ellipsoid is the unit ball and the
  // objective is u . v with v = w^-1/2 (a - b).
  const std::vector<double> v = scaled_difference(a, b, w);
  const std::size_t k = v.size();
  if (k == 0) return 0.0;
  if (k > options.max_support) throw std::invalid_argument("ipm_bruteforce: support too large");

  Philox rng(options.seed);
  auto objective = [&](const std::vector<double>& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += u[i] * v[i];
    return s;
  };
  auto project = [](std::vector<double>& u) {
    double n2 = 0.0;
    for (double x : u) n2 += x * x;
    const double n = std::sqrt(n2);
    if (n > 0.0)
      for (double& x : u) x /= n;
  };

  std::vector<double> best(k, 0.0);
  double best_value = 0.0;
  std::vector<double> u(k);
  const std::size_t random_probes = options.probes / 2;
  for (std::size_t p = 0; p < random_probes; ++p) {
    for (double& x : u) x = rng.normal();
    project(u);
    const double val = objective(u);
    if (val > best_value) {
      best_value = val;
      best = u;
    }
  }
  if (best_value == 0.0) best[0] = 1.0;
  double step = 0.5;
  const std::size_t local_probes = options.probes - random_probes;
  std::size_t since_improvement = 0;
  for (std::size_t p = 0; p < local_probes; ++p) {
    for (std::size_t i = 0; i < k; ++i) u[i] = best[i] + step * rng.normal();
    project(u);
    const double val = objective(u);
    if (val > best_value) {
      best_value = val;
      best = u;
      since_improvement = 0;
    } else if (++since_improvement > 50) {
      step *= 0.7;
      since_improvement = 0;
    }
  }
  // Feasibility in the original scale: rescale if rounding left ||u|| > 1.
  double n2 = 0.0;
  for (double x : best) n2 += x * x;
  return n2 > 1.0 ? best_value / std::sqrt(n2) : best_value;
}

double empirical_ipm(const SampleSet& samples, const FourierDensity& f, const WeightSequence& w,
                     int eval_cutoff) {
  if (eval_cutoff < f.cutoff()) throw std::invalid_argument("empirical_ipm: eval_cutoff below the density cutoff");
  return ipm_closed_form(estimate_coefficient_map(samples, eval_cutoff), f.coefficients(), w);
}

double rate_exponent_sobolev(double alpha, double beta, int d) {
  if (alpha < 0 || beta < 0 || d < 1) throw std::invalid_argument("rate_exponent_sobolev: bad arguments");
  return std::min((alpha + beta) / (2.0 * alpha + d), 0.5);
}

double rate_exponent_rkhs(double alpha, double kappa) {
  if (!(alpha > 0) || !(kappa > 0)) throw std::invalid_argument("rate_exponent_rkhs: bad arguments");
  return std::min((alpha + 1.0) * kappa / (2.0 * alpha * kappa + 2.0), 0.5);
}

double rate_exponent_empirical(double beta, int d) {
  if (beta < 0 || d < 1) throw std::invalid_argument("rate_exponent_empirical: bad arguments");
  return std::min(beta / d, 0.5);
}

int optimal_cutoff(std::uint64_t n, double alpha, int d) {
  if (n < 1) throw std::invalid_argument("optimal_cutoff: n must be >= 1");
  const double m = std::pow(static_cast<double>(n), 1.0 / (2.0 * alpha + d));
  // guard against pow landing a hair above an exact integer
  const double r = std::round(m);
  const int c = std::abs(m - r) < 1e-9 * std::max(1.0, r) ? static_cast<int>(r) : static_cast<int>(std::ceil(m));
  return std::max(1, c);
}

int default_eval_cutoff(std::uint64_t n, double alpha, int d) { return 4 * optimal_cutoff(n, alpha, d); }

}  // namespace advdens
