#pragma once

// Tensorized trigonometric basis on [0,1]^d and densities represented by a
// truncated coefficient box.
//
// 1-d basis convention: psi_0 = 1, psi_{2k-1}(t) = sqrt(2) cos(2 pi k t),
// psi_{2k}(t) = sqrt(2) sin(2 pi k t). A multi-index xi selects
// psi_xi(x) = prod_i psi_{xi_i}(x_i). Storage indices 2k-1 and 2k both
// carry frequency k.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "advdens/rng.hpp"

namespace advdens {

using MultiIndex = std::vector<int>;

class DimensionMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Frequency carried by 1-d basis index `index`.
inline int frequency_of(int index) { return (index + 1) / 2; }

double basis_1d(int index, double t);

/// Fill out[j] = psi_j(t) for j = 0..out.size()-1.
void basis_row(double t, std::span<double> out);

double basis_eval(const MultiIndex& index, std::span<const double> x);

/// Coefficients on the box {xi : ||xi||_inf <= cutoff}, zero outside.
class CoefficientMap {
public:
  CoefficientMap() = default;
  CoefficientMap(int dim, int cutoff);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  std::size_t size() const { return values_.size(); }

  /// Zero for indices outside the box.
  double operator[](const MultiIndex& index) const;
  void set(const MultiIndex& index, double value);

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  MultiIndex index_of(std::size_t flat) const;
  std::size_t flat_of(const MultiIndex& index) const;

  /// Same coefficients on a box of a different cutoff (truncating or padding).
  CoefficientMap with_cutoff(int cutoff) const;

  /// Number of nonzero coefficients.
  std::size_t support_size() const;

  CoefficientMap& operator*=(double c);
  friend CoefficientMap operator*(double c, CoefficientMap m) { return m *= c; }
  friend bool operator==(const CoefficientMap&, const CoefficientMap&) = default;

private:
  int dim_ = 0;
  int cutoff_ = 0;
  std::vector<double> values_;
};

/// Ellipsoid weights w_xi.
class WeightSequence {
public:
  enum class Kind { sobolev, eigen_decay, explicit_list };

  /// (1 + sum_i k_i^2)^beta with k_i the frequency of coordinate i.
  static WeightSequence sobolev(double beta);
  /// i^kappa, the reciprocal of eigenvalue t_i = i^-kappa, with i = eigen_rank(xi).
  static WeightSequence eigen_decay(double kappa);
  /// list[eigen_rank(xi) - 1].
  static WeightSequence explicit_list(std::vector<double> weights);

  double operator()(const MultiIndex& index) const;
  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }

private:
  Kind kind_ = Kind::sobolev;
  double parameter_ = 0.0;
  std::vector<double> list_;
};

/// 1-based position of xi when indices are ordered by ||xi||_inf shell and
/// lexicographically within a shell. For d = 1 this is xi + 1.
std::uint64_t eigen_rank(const MultiIndex& index);

/// n points in [0,1]^d, stored row-major.
class SampleSet {
public:
  SampleSet(int dim, std::vector<double> coords, std::uint64_t seed = 0);

  int dim() const { return dim_; }
  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> coords() const { return coords_; }
  std::uint64_t seed() const { return seed_; }

private:
  int dim_;
  std::vector<double> coords_;
  std::uint64_t seed_;
};

/// A coefficient box with unit mass (coefficient of the zero index is 1).
class FourierDensity {
public:
  explicit FourierDensity(CoefficientMap coefficients);
  static FourierDensity uniform(int dim);

  int dim() const { return coeffs_.dim(); }
  int cutoff() const { return coeffs_.cutoff(); }
  const CoefficientMap& coefficients() const { return coeffs_; }

  bool validated() const { return validated_; }

  /// Copy flagged as validated if absolute_bound() <= 2 (which forces f >= 0)
  /// or the minimum over a dense grid is at least -tolerance; throws
  /// std::domain_error otherwise.
  FourierDensity validate(double tolerance = 1e-9) const;

  /// Minimum of the density over the validation grid.
  double grid_minimum() const;

  /// sum_xi |theta_xi| sup|psi_xi|, an upper bound on sup |f|.
  double absolute_bound() const;

  double operator()(std::span<const double> x) const;

private:
  CoefficientMap coeffs_;
  bool validated_ = false;
};

CoefficientMap estimate_coefficient_map(const SampleSet& samples, int cutoff);
FourierDensity estimate_coefficients(const SampleSet& samples, int cutoff);

double ellipsoid_norm(const CoefficientMap& f, const WeightSequence& w);

double eval_density(const FourierDensity& f, std::span<const double> x);

struct SamplingOptions {
  std::optional<double> sup_bound;
  double min_acceptance = 1e-4;
};

/// Rejection sampling against the uniform proposal on [0,1]^d.
SampleSet sample_density(const FourierDensity& f, std::size_t n, std::uint64_t seed,
                         const SamplingOptions& options = {});

SampleSet uniform_samples(int dim, std::size_t n, std::uint64_t seed);

/// Product density prod_i (1 + sum_{k<=max_freq} c k^-(alpha+1) sqrt2 (cos + sin)(2 pi k x_i))
/// with c chosen so the 1-d factor stays >= 1 - 0.9. Used as a smooth target.
FourierDensity smooth_test_density(int dim, double alpha, int max_freq);

/// Random density on the cutoff box: non-constant coefficients drawn
/// uniformly in [-1, 1], then scaled so sum |theta| sup|psi| = `spread` < 1.
FourierDensity random_fourier_density(int dim, int cutoff, Philox& rng, double spread = 0.9);

/// Plain-text format: "d M" header, then one "xi_1 ... xi_d value" line per
/// nonzero coefficient. Values use the shortest round-trip representation.
void write_density(std::ostream& os, const FourierDensity& f);
FourierDensity read_density(std::istream& is);

std::string format_double(double v);
double parse_double(const std::string& s);

namespace kernels {
// Unnormalized sums sum_j psi_xi(X_j) over the cutoff box (row-major).
namespace serial {
std::vector<double> accumulate_coefficients(const SampleSet& samples, int cutoff);
}
namespace parallel {
std::vector<double> accumulate_coefficients(const SampleSet& samples, int cutoff);
}
}  // namespace kernels

}  // namespace advdens
