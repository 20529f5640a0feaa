#pragma once

#include <cstdint>

#include "advdens/fourier.hpp"

namespace advdens {

/// sup over the ellipsoid {f : sum w_xi f_xi^2 <= 1} of sum f_xi (a_xi - b_xi),
/// attained by Cauchy-Schwarz: sqrt(sum w_xi^-1 (a_xi - b_xi)^2) over the union box.
double ipm_closed_form(const CoefficientMap& a, const CoefficientMap& b, const WeightSequence& w);

struct BruteForceOptions {
  std::size_t probes = 100000;
  std::uint64_t seed = 0x1b3d5f;
  std::size_t max_support = 12;
};

/// Random search over feasible ellipsoid points, followed by a shrinking-step
/// local search from the best probe. Every probe is feasible, so the result
/// is a lower bound on the supremum.
double ipm_bruteforce(const CoefficientMap& a, const CoefficientMap& b, const WeightSequence& w,
                      const BruteForceOptions& options = {});

/// Truncated IPM between the empirical coefficients at `eval_cutoff` and f.
double empirical_ipm(const SampleSet& samples, const FourierDensity& f, const WeightSequence& w,
                     int eval_cutoff);

/// Exponent e of the Sobolev minimax rate n^-e: min((alpha+beta)/(2 alpha+d), 1/2).
double rate_exponent_sobolev(double alpha, double beta, int d);

/// Exponent for eigen-decay t_i ~ i^-kappa: min((alpha+1) kappa / (2 alpha kappa + 2), 1/2).
double rate_exponent_rkhs(double alpha, double kappa);

/// Exponent of the raw empirical plug-in upper bound n^-beta/d v log n / sqrt n,
/// ignoring the log factor: min(beta/d, 1/2).
double rate_exponent_empirical(double beta, int d);

/// ceil(n^(1/(2 alpha + d))).
int optimal_cutoff(std::uint64_t n, double alpha, int d);

/// Default evaluation cutoff for truncated IPMs: 4 * optimal_cutoff.
int default_eval_cutoff(std::uint64_t n, double alpha, int d);

}  // namespace advdens
