#include "advdens/estimators.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "advdens/ipm.hpp"

namespace advdens {

GeneratorFamily::GeneratorFamily(std::vector<FourierDensity> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("generator family must be nonempty");
  for (auto& m : members_) {
    if (m.dim() != members_.front().dim()) throw DimensionMismatch("generator family members differ in dimension");
    if (!m.validated()) m = m.validate();
  }
}

FourierDensity truncated_estimator(const SampleSet& samples, double alpha, double /*beta_eval*/) {
  const int cutoff = optimal_cutoff(samples.size(), alpha, samples.dim());
  return estimate_coefficients(samples, cutoff);
}

double gaussian_attenuation(const MultiIndex& index, double bandwidth) {
  double k2 = 0.0;
  for (int e : index) k2 += static_cast<double>(frequency_of(e)) * frequency_of(e);
  return std::exp(-2.0 * std::numbers::pi * std::numbers::pi * k2 * bandwidth * bandwidth);
}

FourierDensity kernel_smoothed_coeffs(const SampleSet& samples, double bandwidth, int cutoff) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kernel_smoothed_coeffs: bandwidth must be > 0");
  CoefficientMap c = estimate_coefficient_map(samples, cutoff);
  auto v = c.values();
  for (std::size_t j = 1; j < v.size(); ++j) v[j] *= gaussian_attenuation(c.index_of(j), bandwidth);
  return FourierDensity(std::move(c));
}

Projection adversarial_projection(const GeneratorFamily& family, const CoefficientMap& plugin,
                                  const WeightSequence& w) {
  Projection p;
  p.losses.reserve(family.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double loss = ipm_closed_form(family[i].coefficients(), plugin, w);
    p.losses.push_back(loss);
    if (loss < best) {
      best = loss;
      p.chosen = i;
    }
  }
  return p;
}

SimpleOracleReport check_simple_oracle(const GeneratorFamily& family, const CoefficientMap& target,
                                       const CoefficientMap& plugin, const WeightSequence& w) {
  if (target.dim() != family.dim() || plugin.dim() != family.dim())
    throw DimensionMismatch("check_simple_oracle: dimension mismatch");
  SimpleOracleReport r;
  const Projection proj = adversarial_projection(family, plugin, w);
  r.chosen = proj.chosen;
  r.lhs = ipm_closed_form(target, family[proj.chosen].coefficients(), w);
  r.approximation = std::numeric_limits<double>::infinity();
  for (const auto& m : family.members())
    r.approximation = std::min(r.approximation, ipm_closed_form(m.coefficients(), target, w));
  r.stochastic = ipm_closed_form(target, plugin, w);
  r.rhs = r.approximation + 2.0 * r.stochastic;
  r.holds = r.lhs <= r.rhs + kSimpleOracleTolerance;
  return r;
}

}  // namespace advdens
