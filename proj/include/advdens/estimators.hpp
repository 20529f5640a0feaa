#pragma once

#include <vector>

#include "advdens/fourier.hpp"

namespace advdens {

/// Finite candidate set standing in for the generator class.
class GeneratorFamily {
public:
  explicit GeneratorFamily(std::vector<FourierDensity> members);

  std::size_t size() const { return members_.size(); }
  int dim() const { return members_.front().dim(); }
  const FourierDensity& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<FourierDensity>& members() const { return members_; }

private:
  std::vector<FourierDensity> members_;
};

/// Empirical coefficients truncated at optimal_cutoff(n, alpha, d).
/// `beta_eval` names the evaluation smoothness the estimator is tuned for;
/// the cutoff does not depend on it.
FourierDensity truncated_estimator(const SampleSet& samples, double alpha, double beta_eval = 0.0);

/// Fourier attenuation exp(-2 pi^2 |k|^2 h^2) of the periodized Gaussian kernel.
double gaussian_attenuation(const MultiIndex& index, double bandwidth);

/// Empirical coefficients smoothed by a periodized Gaussian kernel of bandwidth h.
FourierDensity kernel_smoothed_coeffs(const SampleSet& samples, double bandwidth, int cutoff);

struct Projection {
  std::size_t chosen = 0;
  std::vector<double> losses;
};

/// Exact argmin over the family of ipm_closed_form(member, plugin, w); ties go
/// to the lowest index.
Projection adversarial_projection(const GeneratorFamily& family, const CoefficientMap& plugin,
                                  const WeightSequence& w);

struct SimpleOracleReport {
  double lhs = 0.0;                 // d(target, projection)
  double approximation = 0.0;       // min_mu d(mu, target)
  double stochastic = 0.0;          // d(target, plugin)
  double rhs = 0.0;                 // approximation + 2 * stochastic
  std::size_t chosen = 0;
  bool holds = false;
};

inline constexpr double kSimpleOracleTolerance = 1e-10;

SimpleOracleReport check_simple_oracle(const GeneratorFamily& family, const CoefficientMap& target,
                                       const CoefficientMap& plugin, const WeightSequence& w);

}  // namespace advdens
