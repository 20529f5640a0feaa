#pragma once

// Invertible leaky-ReLU MLP generators with exact log-density, the
// feedforward discriminators that realize their log-density ratios, the
// finite-family GAN estimator and the closed-form Gaussian GAN.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "advdens/kernels.hpp"
#include "advdens/rng.hpp"

namespace advdens {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// d x n, one point per column.
using PointMatrix = Eigen::MatrixXd;

inline constexpr double kNegativeInfinity = -std::numeric_limits<double>::infinity();

/// Leaky ReLU max(t, a t) and its inverse min(t, t / a) for 0 < a <= 1.
inline double leaky_relu(double t, double a) { return t > 0.0 ? t : a * t; }
inline double leaky_relu_inverse(double t, double a) { return t > 0.0 ? t : t / a; }

inline constexpr double kMinAbsDeterminant = 1e-12;
/// Slack on the [0,1]^d membership test of pulled-back points.
inline constexpr double kSupportTolerance = 1e-12;

/// x = W_L h_{L-1} + b_L with h_l = leaky_relu(W_l h_{l-1} + b_l), h_0 = z.
class MlpGenerator {
public:
  MlpGenerator(double leak, std::vector<Matrix> weights, std::vector<Vector> biases);

  static MlpGenerator identity(int dim, int depth, double leak = 1.0);
  /// Weights I + 0.5 G / sqrt(d) (G standard normal) redrawn until
  /// |det| >= 0.1; biases N(0, 0.25).
  static MlpGenerator random(int dim, int depth, double leak, Philox& rng);

  int dim() const { return static_cast<int>(weights_.front().rows()); }
  int depth() const { return static_cast<int>(weights_.size()); }
  double leak() const { return leak_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Vector>& biases() const { return biases_; }
  const std::vector<Matrix>& inverse_weights() const { return inverses_; }

  /// sum_l log |det W_l|.
  double log_abs_det_sum() const { return log_det_sum_; }

  Vector forward(const Vector& z) const;
  PointMatrix forward(const PointMatrix& z) const;

  /// Pre-image of x under the layer recursion, with no support check, and
  /// the number of hidden pre-activations that are <= 0.
  struct Pullback {
    Vector z;
    int nonpositive = 0;
  };
  Pullback pullback(const Vector& x) const;

  /// z with forward(z) = x, or nullopt when z falls outside [0,1]^d.
  std::optional<Vector> inverse(const Vector& x) const;

  /// Exact log-density of g(Z), Z ~ U([0,1]^d); kNegativeInfinity off the image.
  double log_density(const Vector& x) const;

  /// Bounding box of the image of [0,1]^d by interval propagation.
  Box image_bounds() const;

  MlpGenerator perturbed(double scale, Philox& rng) const;

  /// Same weights with hidden biases shifted so that every hidden
  /// pre-activation vanishes at the image of the cube's center, which puts
  /// the activation kinks inside the latent cube.
  MlpGenerator centered_kinks() const;

private:
  double leak_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
  std::vector<Matrix> inverses_;
  double log_det_sum_ = 0.0;
};

struct MonteCarloEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

inline constexpr std::size_t kNormalizationReplicates = 64;

/// Integral of exp(log_density) over image_bounds(). The points are split
/// into independent replicates; each places one uniform draw in every cell
/// of an s^d grid over the box. stderr_ comes from the spread of the
/// replicate estimates.
MonteCarloEstimate flow_normalization(const MlpGenerator& g, std::size_t points, std::uint64_t seed);

Vector generator_forward(const MlpGenerator& g, const Vector& z);
std::optional<Vector> generator_inverse(const MlpGenerator& g, const Vector& x);
double generator_log_density(const MlpGenerator& g, const Vector& x);

/// One half of a realized discriminator: m_1 = s(V_1 x + c_1), ...,
/// m_{L-1} = s(V_{L-1} m_{L-2} + c_{L-1}) with the dual activation
/// s(t) = min(t, t / a), output log(1/a) #{m_l(i) <= 0} + offset.
struct HalfNetwork {
  int dim = 0;
  double leak = 1.0;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  double offset = 0.0;

  /// Transcribes the inverse recursion of g: V_l = W_{L-l+1}^-1,
  /// c_l = -W_{L-l+1}^-1 b_{L-l+1}, offset = -sum log|det W_j|.
  static HalfNetwork from_generator(const MlpGenerator& g);

  double operator()(const Vector& x) const;
  double operator()(const double* x) const;
};

/// f(x) = positive(x) - negative(x).
class RealizedDiscriminator {
public:
  RealizedDiscriminator(HalfNetwork positive, HalfNetwork negative);

  double operator()(const Vector& x) const { return positive_(x) - negative_(x); }
  RealizedDiscriminator negated() const { return {negative_, positive_}; }
  const HalfNetwork& positive() const { return positive_; }
  const HalfNetwork& negative() const { return negative_; }
  int dim() const { return positive_.dim; }

private:
  HalfNetwork positive_;
  HalfNetwork negative_;
};

/// Discriminator whose output is log mu_true - log mu_other on the common support.
RealizedDiscriminator realize_discriminator(const MlpGenerator& g_true, const MlpGenerator& g_other);

/// A finite discriminator family stored as distinct half networks plus
/// (positive, negative) index pairs, so each half is evaluated once per point.
struct DiscriminatorBank {
  std::vector<HalfNetwork> halves;
  std::vector<std::pair<int, int>> members;

  std::size_t size() const { return members.size(); }

  /// All ordered pairs (i, j), i != j, of the generators' log-densities.
  /// Closed under negation.
  static DiscriminatorBank pairwise(const std::vector<MlpGenerator>& generators);
  static DiscriminatorBank from(const std::vector<RealizedDiscriminator>& family);

  /// True if every member's negation is also a member.
  bool symmetric() const;
};

struct BankMoments {
  std::vector<double> mean;      // per member, of the clamped output
  std::vector<double> variance;  // per member, population variance of the clamped output
  std::size_t clamp_binding = 0; // (point, member) evaluations where the clamp was active
  std::size_t count = 0;
};

namespace kernels {
namespace serial {
BankMoments bank_moments(const DiscriminatorBank& bank, const PointMatrix& points, double clamp);
}
namespace parallel {
BankMoments bank_moments(const DiscriminatorBank& bank, const PointMatrix& points, double clamp);
}
}  // namespace kernels

/// Clamp level that realizable discriminators between these generators
/// never exceed: 2 (L-1) d log(1/a) + 2 max_g |sum log|det W||.
double default_clamp(const std::vector<MlpGenerator>& generators);

PointMatrix uniform_latent(int dim, std::size_t n, Philox& rng);

struct GanResult {
  std::size_t chosen = 0;
  std::vector<double> values;  // max over the discriminators, per generator
  double clamp = 0.0;
  std::size_t clamp_binding = 0;
};

/// argmin_theta max_omega { E_m f(g_theta(Z)) - E_n f(X) } over the finite
/// families with outputs clamped to [-clamp, clamp]. Ties go to the lowest index.
GanResult enumerated_gan(const std::vector<MlpGenerator>& generators, const DiscriminatorBank& bank,
                         const PointMatrix& data, const PointMatrix& latent, double clamp);
GanResult enumerated_gan(const std::vector<MlpGenerator>& generators,
                         const std::vector<RealizedDiscriminator>& discriminators, const PointMatrix& data,
                         const PointMatrix& latent, double clamp);

struct GeneralizedOracleReport {
  std::size_t chosen = 0;
  double lhs = 0.0;               // d_F(mu_chosen, nu)
  double approximation = 0.0;     // d_F(mu_theta, nu) at the tightest theta
  double data_term = 0.0;         // d_F(nu_n, nu)
  double generator_term = 0.0;    // d_F(mu_theta_m, mu_theta) at the tightest theta
  double latent_term = 0.0;       // d_{F o G}(pi_m, pi)
  double rhs = 0.0;               // min over theta of the bound
  std::size_t tightest = 0;
  double mc_stderr = 0.0;
  double clamp = 0.0;
  std::size_t clamp_binding = 0;
  bool holds = false;
};

struct OracleCheckOptions {
  std::size_t mc_points = 1000000;
  std::optional<double> clamp;
};

/// Runs the finite-family GAN on n target samples and m latent samples and
/// evaluates every term of the generalized oracle inequality. Population
/// expectations use one shared Monte-Carlo latent sample.
GeneralizedOracleReport check_generalized_oracle(const std::vector<MlpGenerator>& generators,
                                                 const DiscriminatorBank& bank, const MlpGenerator& target,
                                                 std::size_t n, std::size_t m, std::uint64_t seed,
                                                 const OracleCheckOptions& options = {});

// --- Gaussian ---------------------------------------------------------------

/// N(mean, factor factor^T) with factor d x p.
class GaussianModel {
public:
  GaussianModel(Vector mean, Matrix factor);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Matrix& factor() const { return factor_; }
  Matrix covariance() const { return factor_ * factor_.transpose(); }

  double log_density(const Vector& x) const;
  PointMatrix sample(std::size_t n, Philox& rng) const;

private:
  Vector mean_;
  Matrix factor_;
};

/// Moment matching: mean and 1/n covariance of the data, lower Cholesky
/// factor padded with zero columns to width p.
GaussianModel gaussian_gan_fit(const PointMatrix& data, int p);

/// |mean - data mean| + |cov + mean mean^T - data second moment|_F.
double quadratic_moment_gap(const GaussianModel& model, const PointMatrix& data);

double gaussian_kl(const GaussianModel& p, const GaussianModel& q);

// --- plain-text format ------------------------------------------------------

void write_generator(std::ostream& os, const MlpGenerator& g);
MlpGenerator read_generator(std::istream& is);
void write_discriminator(std::ostream& os, const RealizedDiscriminator& f);
RealizedDiscriminator read_discriminator(std::istream& is);

}  // namespace advdens
