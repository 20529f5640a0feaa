#include "advdens/flow.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "advdens/fourier.hpp"

namespace advdens {

namespace {

// Column vector with inline storage for up to 16 entries.
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 16, 1>;

void check_leak(double a) {
  if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("leak must lie in (0, 1]");
}

double log_inverse_leak(double a) { return -std::log(a); }

}  // namespace

MlpGenerator::MlpGenerator(double leak, std::vector<Matrix> weights, std::vector<Vector> biases)
    : leak_(leak), weights_(std::move(weights)), biases_(std::move(biases)) {
  check_leak(leak_);
  if (weights_.empty()) throw std::invalid_argument("generator needs at least one layer");
  if (weights_.size() != biases_.size()) throw std::invalid_argument("weights and biases differ in count");
  const auto d = weights_.front().rows();
  if (d < 1 || d > 16) throw std::invalid_argument("generator dimension must lie in [1, 16]");
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l].rows() != d || weights_[l].cols() != d || biases_[l].size() != d)
      throw std::invalid_argument("layer " + std::to_string(l + 1) + " has inconsistent shape");
    Eigen::PartialPivLU<Matrix> lu(weights_[l]);
    const double det = lu.determinant();
    if (!(std::abs(det) >= kMinAbsDeterminant))
      throw std::invalid_argument("layer " + std::to_string(l + 1) + " is not invertible");
    inverses_.push_back(lu.inverse());
    log_det_sum_ += std::log(std::abs(det));
  }
}

MlpGenerator MlpGenerator::identity(int dim, int depth, double leak) {
  std::vector<Matrix> w(depth, Matrix::Identity(dim, dim));
  std::vector<Vector> b(depth, Vector::Zero(dim));
  return MlpGenerator(leak, std::move(w), std::move(b));
}

MlpGenerator MlpGenerator::random(int dim, int depth, double leak, Philox& rng) {
  if (dim < 1 || depth < 1) throw std::invalid_argument("random generator needs dim, depth >= 1");
  std::vector<Matrix> w;
  std::vector<Vector> b;
  const double scale = 0.5 / std::sqrt(static_cast<double>(dim));
  for (int l = 0; l < depth; ++l) {
    Matrix m(dim, dim);
    do {
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = (i == j ? 1.0 : 0.0) + scale * rng.normal();
    } while (std::abs(m.determinant()) < 0.1);
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = 0.5 * rng.normal();
    w.push_back(std::move(m));
    b.push_back(std::move(v));
  }
  return MlpGenerator(leak, std::move(w), std::move(b));
}

MlpGenerator MlpGenerator::perturbed(double scale, Philox& rng) const {
  std::vector<Matrix> w = weights_;
  std::vector<Vector> b = biases_;
  for (std::size_t l = 0; l < w.size(); ++l) {
    Matrix base = w[l];
    do {
      w[l] = base;
      for (Eigen::Index i = 0; i < w[l].size(); ++i) w[l].data()[i] += scale * rng.normal();
    } while (std::abs(w[l].determinant()) < 0.1);
    for (Eigen::Index i = 0; i < b[l].size(); ++i) b[l](i) += scale * rng.normal();
  }
  return MlpGenerator(leak_, std::move(w), std::move(b));
}

MlpGenerator MlpGenerator::centered_kinks() const {
  std::vector<Vector> b = biases_;
  Vector h = Vector::Constant(dim(), 0.5);
  for (int l = 0; l + 1 < depth(); ++l) {
    b[l] = -(weights_[l] * h);
    h = weights_[l] * h + b[l];
    h = h.unaryExpr([a = leak_](double t) { return leaky_relu(t, a); });
  }
  return MlpGenerator(leak_, weights_, std::move(b));
}

Vector MlpGenerator::forward(const Vector& z) const {
  if (z.size() != dim()) throw DimensionMismatch("generator input has wrong dimension");
  Vector h = z;
  const int L = depth();
  for (int l = 0; l < L; ++l) {
    h = weights_[l] * h + biases_[l];
    if (l + 1 < L) h = h.unaryExpr([a = leak_](double t) { return leaky_relu(t, a); });
  }
  return h;
}

PointMatrix MlpGenerator::forward(const PointMatrix& z) const {
  if (z.rows() != dim()) throw DimensionMismatch("generator input has wrong dimension");
  PointMatrix h = z;
  const int L = depth();
  for (int l = 0; l < L; ++l) {
    h = (weights_[l] * h).colwise() + biases_[l];
    if (l + 1 < L) h = h.unaryExpr([a = leak_](double t) { return leaky_relu(t, a); });
  }
  return h;
}

MlpGenerator::Pullback MlpGenerator::pullback(const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("generator output has wrong dimension");
  Pullback out;
  Vector h = x;
  for (int l = depth() - 1; l >= 0; --l) {
    h = inverses_[l] * (h - biases_[l]);
    if (l > 0) {
      for (Eigen::Index i = 0; i < h.size(); ++i) {
        if (h(i) <= 0.0) ++out.nonpositive;
        h(i) = leaky_relu_inverse(h(i), leak_);
      }
    }
  }
  out.z = std::move(h);
  return out;
}

std::optional<Vector> MlpGenerator::inverse(const Vector& x) const {
  Pullback p = pullback(x);
  for (Eigen::Index i = 0; i < p.z.size(); ++i)
    if (!(p.z(i) >= -kSupportTolerance && p.z(i) <= 1.0 + kSupportTolerance)) return std::nullopt;
  return std::move(p.z);
}

double MlpGenerator::log_density(const Vector& x) const {
  const Pullback p = pullback(x);
  for (Eigen::Index i = 0; i < p.z.size(); ++i)
    if (!(p.z(i) >= -kSupportTolerance && p.z(i) <= 1.0 + kSupportTolerance)) return kNegativeInfinity;
  return -log_det_sum_ + log_inverse_leak(leak_) * p.nonpositive;
}

Box MlpGenerator::image_bounds() const {
  const int d = dim();
  Vector lo = Vector::Zero(d), hi = Vector::Ones(d);
  const int L = depth();
  for (int l = 0; l < L; ++l) {
    const Matrix pos = weights_[l].cwiseMax(0.0);
    const Matrix neg = weights_[l].cwiseMin(0.0);
    Vector nlo = pos * lo + neg * hi + biases_[l];
    Vector nhi = pos * hi + neg * lo + biases_[l];
    if (l + 1 < L) {
      for (int i = 0; i < d; ++i) {
        nlo(i) = leaky_relu(nlo(i), leak_);
        nhi(i) = leaky_relu(nhi(i), leak_);
      }
    }
    lo = std::move(nlo);
    hi = std::move(nhi);
  }
  Box box;
  box.lower.assign(lo.data(), lo.data() + d);
  box.upper.assign(hi.data(), hi.data() + d);
  return box;
}

MonteCarloEstimate flow_normalization(const MlpGenerator& g, std::size_t points, std::uint64_t seed) {
  const int d = g.dim();
  const std::size_t reps = std::clamp<std::size_t>(points / 16, 2, kNormalizationReplicates);
  const std::size_t per_rep = points / reps;
  const auto s = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(per_rep), 1.0 / d) + 1e-9));
  std::size_t cells = 1;
  for (int i = 0; i < d; ++i) cells *= s;
  if (cells == 0) throw std::invalid_argument("flow_normalization needs more points");
  const Box box = g.image_bounds();
  Philox rng(seed);
  // replicate r, cell c -> column r * cells + c, one jittered point per cell
  PointMatrix x(d, static_cast<Eigen::Index>(reps * cells));
  std::vector<std::size_t> cell(d);
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t c = 0; c < cells; ++c) {
      std::size_t rest = c;
      for (int i = d - 1; i >= 0; --i) {
        cell[i] = rest % s;
        rest /= s;
      }
      const auto col = static_cast<Eigen::Index>(r * cells + c);
      for (int i = 0; i < d; ++i) {
        const double u = (static_cast<double>(cell[i]) + rng.uniform()) / static_cast<double>(s);
        x(i, col) = box.lower[i] + (box.upper[i] - box.lower[i]) * u;
      }
    }
  auto body = [&](std::size_t j, std::span<double> acc) {
    acc[j / cells] += std::exp(g.log_density(x.col(static_cast<Eigen::Index>(j))));
  };
  const auto sums = kernels::parallel::chunked_reduce(reps * cells, reps, body);
  const double cell_volume = box.volume() / static_cast<double>(cells);
  double mean = 0.0;
  for (double v : sums) mean += cell_volume * v;
  mean /= static_cast<double>(reps);
  double var = 0.0;
  for (double v : sums) var += (cell_volume * v - mean) * (cell_volume * v - mean);
  var /= static_cast<double>(reps - 1);
  return {mean, std::sqrt(var / static_cast<double>(reps))};
}

Vector generator_forward(const MlpGenerator& g, const Vector& z) { return g.forward(z); }
std::optional<Vector> generator_inverse(const MlpGenerator& g, const Vector& x) { return g.inverse(x); }
double generator_log_density(const MlpGenerator& g, const Vector& x) { return g.log_density(x); }

// --- discriminators ---------------------------------------------------------

HalfNetwork HalfNetwork::from_generator(const MlpGenerator& g) {
  HalfNetwork h;
  h.dim = g.dim();
  h.leak = g.leak();
  const int L = g.depth();
  for (int l = 1; l <= L - 1; ++l) {
    const int layer = L - l;  // zero-based index of W_{L-l+1}
    h.weights.push_back(g.inverse_weights()[layer]);
    h.biases.push_back(-(g.inverse_weights()[layer] * g.biases()[layer]));
  }
  h.offset = -g.log_abs_det_sum();
  return h;
}

double HalfNetwork::operator()(const double* x) const {
  SmallVector m = Eigen::Map<const Eigen::VectorXd>(x, dim);
  int count = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    SmallVector next = weights[l] * m + biases[l];
    for (Eigen::Index i = 0; i < next.size(); ++i) {
      next(i) = leaky_relu_inverse(next(i), leak);
      if (next(i) <= 0.0) ++count;
    }
    m = next;
  }
  return log_inverse_leak(leak) * count + offset;
}

double HalfNetwork::operator()(const Vector& x) const {
  if (x.size() != dim) throw DimensionMismatch("discriminator input has wrong dimension");
  return (*this)(x.data());
}

RealizedDiscriminator::RealizedDiscriminator(HalfNetwork positive, HalfNetwork negative)
    : positive_(std::move(positive)), negative_(std::move(negative)) {
  if (positive_.dim != negative_.dim) throw DimensionMismatch("discriminator halves differ in dimension");
}

RealizedDiscriminator realize_discriminator(const MlpGenerator& g_true, const MlpGenerator& g_other) {
  if (g_true.dim() != g_other.dim()) throw DimensionMismatch("generators differ in dimension");
  if (g_true.depth() != g_other.depth() || g_true.leak() != g_other.leak())
    throw std::invalid_argument("generators differ in depth or leak");
  return {HalfNetwork::from_generator(g_true), HalfNetwork::from_generator(g_other)};
}

DiscriminatorBank DiscriminatorBank::pairwise(const std::vector<MlpGenerator>& generators) {
  if (generators.empty()) throw std::invalid_argument("pairwise bank needs generators");
  DiscriminatorBank bank;
  for (const auto& g : generators) {
    if (g.dim() != generators.front().dim()) throw DimensionMismatch("generators differ in dimension");
    bank.halves.push_back(HalfNetwork::from_generator(g));
  }
  const int k = static_cast<int>(generators.size());
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) bank.members.emplace_back(i, j);
  if (bank.members.empty()) bank.members.emplace_back(0, 0);
  return bank;
}

DiscriminatorBank DiscriminatorBank::from(const std::vector<RealizedDiscriminator>& family) {
  if (family.empty()) throw std::invalid_argument("discriminator family is empty");
  DiscriminatorBank bank;
  for (const auto& f : family) {
    if (f.dim() != family.front().dim()) throw DimensionMismatch("discriminators differ in dimension");
    const int p = static_cast<int>(bank.halves.size());
    bank.halves.push_back(f.positive());
    bank.halves.push_back(f.negative());
    bank.members.emplace_back(p, p + 1);
  }
  return bank;
}

bool DiscriminatorBank::symmetric() const {
  for (const auto& [p, q] : members)
    if (std::find(members.begin(), members.end(), std::make_pair(q, p)) == members.end()) return false;
  return true;
}

namespace {

// Half-network outputs on columns [begin, begin + cols) of `points`, one
// matrix product per layer.
void half_block(const HalfNetwork& h, const PointMatrix& points, Eigen::Index begin, Eigen::Index cols,
                double* out) {
  Matrix m = points.middleCols(begin, cols);
  std::vector<int> count(static_cast<std::size_t>(cols), 0);
  for (std::size_t l = 0; l < h.weights.size(); ++l) {
    Matrix next = h.weights[l] * m;
    next.colwise() += h.biases[l];
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < next.rows(); ++i) {
        double& v = next(i, j);
        v = leaky_relu_inverse(v, h.leak);
        if (v <= 0.0) ++count[static_cast<std::size_t>(j)];
      }
    m.swap(next);
  }
  const double step = log_inverse_leak(h.leak);
  for (Eigen::Index j = 0; j < cols; ++j) out[j] = step * count[static_cast<std::size_t>(j)] + h.offset;
}

template <bool Parallel>
BankMoments bank_moments_impl(const DiscriminatorBank& bank, const PointMatrix& points, double clamp) {
  if (bank.halves.empty()) throw std::invalid_argument("empty discriminator bank");
  if (points.rows() != bank.halves.front().dim) throw DimensionMismatch("points and discriminators differ in dimension");
  if (!(clamp >= 0.0)) throw std::invalid_argument("clamp must be nonnegative");
  const std::size_t n = static_cast<std::size_t>(points.cols());
  const std::size_t k = bank.size();
  const std::size_t nh = bank.halves.size();

  // halves x n table of half outputs
  std::vector<double> table;
  if constexpr (Parallel) {
    table.resize(nh * n);
    const std::size_t blocks = (n + kernels::kChunk - 1) / kernels::kChunk;
    const auto nb = static_cast<long long>(blocks * nh);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long t = 0; t < nb; ++t) {
      const std::size_t b = static_cast<std::size_t>(t) / nh, j = static_cast<std::size_t>(t) % nh;
      const std::size_t begin = b * kernels::kChunk;
      const std::size_t cols = std::min(n, begin + kernels::kChunk) - begin;
      half_block(bank.halves[j], points, static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(cols),
                 table.data() + j * n + begin);
    }
  }

  auto body = [&](std::size_t i, std::span<double> acc) {
    thread_local std::vector<double> h;
    h.resize(nh);
    if constexpr (Parallel) {
      for (std::size_t j = 0; j < nh; ++j) h[j] = table[j * n + i];
    } else {
      const double* x = points.col(static_cast<Eigen::Index>(i)).data();
      for (std::size_t j = 0; j < nh; ++j) h[j] = bank.halves[j](x);
    }
    for (std::size_t j = 0; j < k; ++j) {
      const auto [p, q] = bank.members[j];
      double v = h[p] - h[q];
      if (v > clamp) {
        v = clamp;
        acc[2 * k] += 1.0;
      } else if (v < -clamp) {
        v = -clamp;
        acc[2 * k] += 1.0;
      }
      acc[j] += v;
      acc[k + j] += v * v;
    }
  };
  const std::vector<double> sums = Parallel ? kernels::parallel::chunked_reduce(n, 2 * k + 1, body)
                                            : kernels::serial::chunked_reduce(n, 2 * k + 1, body);
  BankMoments out;
  out.count = n;
  out.mean.resize(k);
  out.variance.resize(k);
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j < k; ++j) {
    out.mean[j] = n ? sums[j] / nn : 0.0;
    out.variance[j] = n ? std::max(0.0, sums[k + j] / nn - out.mean[j] * out.mean[j]) : 0.0;
  }
  out.clamp_binding = static_cast<std::size_t>(sums[2 * k]);
  return out;
}

}  // namespace

namespace kernels {
namespace serial {
BankMoments bank_moments(const DiscriminatorBank& bank, const PointMatrix& points, double clamp) {
  return bank_moments_impl<false>(bank, points, clamp);
}
}  // namespace serial
namespace parallel {
BankMoments bank_moments(const DiscriminatorBank& bank, const PointMatrix& points, double clamp) {
  return bank_moments_impl<true>(bank, points, clamp);
}
}  // namespace parallel
}  // namespace kernels

double default_clamp(const std::vector<MlpGenerator>& generators) {
  if (generators.empty()) throw std::invalid_argument("default_clamp needs generators");
  double hidden = 0.0, logdet = 0.0;
  for (const auto& g : generators) {
    hidden = std::max(hidden, (g.depth() - 1.0) * g.dim() * log_inverse_leak(g.leak()));
    logdet = std::max(logdet, std::abs(g.log_abs_det_sum()));
  }
  return std::max(1.0, 2.0 * hidden + 2.0 * logdet);
}

PointMatrix uniform_latent(int dim, std::size_t n, Philox& rng) {
  PointMatrix z(dim, static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (int i = 0; i < dim; ++i) z(i, j) = rng.uniform();
  return z;
}

// --- enumerated GAN ---------------------------------------------------------

namespace {

double max_difference(const std::vector<double>& a, const std::vector<double>& b) {
  double best = -INFINITY;
  for (std::size_t j = 0; j < a.size(); ++j) best = std::max(best, a[j] - b[j]);
  return best;
}

double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  return std::max(max_difference(a, b), max_difference(b, a));
}

}  // namespace

GanResult enumerated_gan(const std::vector<MlpGenerator>& generators, const DiscriminatorBank& bank,
                         const PointMatrix& data, const PointMatrix& latent, double clamp) {
  if (generators.empty()) throw std::invalid_argument("enumerated_gan needs generators");
  if (bank.size() == 0) throw std::invalid_argument("enumerated_gan needs discriminators");
  if (data.cols() == 0 || latent.cols() == 0) throw std::invalid_argument("enumerated_gan needs samples");
  GanResult out;
  out.clamp = clamp;
  const BankMoments on_data = kernels::parallel::bank_moments(bank, data, clamp);
  out.clamp_binding += on_data.clamp_binding;
  for (const auto& g : generators) {
    const BankMoments on_gen = kernels::parallel::bank_moments(bank, g.forward(latent), clamp);
    out.clamp_binding += on_gen.clamp_binding;
    out.values.push_back(max_difference(on_gen.mean, on_data.mean));
  }
  out.chosen = static_cast<std::size_t>(std::min_element(out.values.begin(), out.values.end()) - out.values.begin());
  return out;
}

GanResult enumerated_gan(const std::vector<MlpGenerator>& generators,
                         const std::vector<RealizedDiscriminator>& discriminators, const PointMatrix& data,
                         const PointMatrix& latent, double clamp) {
  return enumerated_gan(generators, DiscriminatorBank::from(discriminators), data, latent, clamp);
}

GeneralizedOracleReport check_generalized_oracle(const std::vector<MlpGenerator>& generators,
                                                 const DiscriminatorBank& bank, const MlpGenerator& target,
                                                 std::size_t n, std::size_t m, std::uint64_t seed,
                                                 const OracleCheckOptions& options) {
  if (generators.empty()) throw std::invalid_argument("oracle check needs generators");
  if (n == 0 || m == 0 || options.mc_points < 2) throw std::invalid_argument("oracle check needs samples");
  const int d = target.dim();
  std::vector<MlpGenerator> all = generators;
  all.push_back(target);
  const double clamp = options.clamp ? *options.clamp : default_clamp(all);

  Philox data_rng(seed, 1), latent_rng(seed, 2), mc_rng(seed, 3);
  const PointMatrix data = target.forward(uniform_latent(d, n, data_rng));
  const PointMatrix latent = uniform_latent(d, m, latent_rng);
  const PointMatrix population = uniform_latent(d, options.mc_points, mc_rng);

  GeneralizedOracleReport r;
  r.clamp = clamp;
  const BankMoments data_m = kernels::parallel::bank_moments(bank, data, clamp);
  const BankMoments target_pop = kernels::parallel::bank_moments(bank, target.forward(population), clamp);
  r.clamp_binding = data_m.clamp_binding + target_pop.clamp_binding;

  const std::size_t k = generators.size();
  std::vector<BankMoments> pop(k), emp(k);
  std::vector<double> values(k);
  for (std::size_t t = 0; t < k; ++t) {
    pop[t] = kernels::parallel::bank_moments(bank, generators[t].forward(population), clamp);
    emp[t] = kernels::parallel::bank_moments(bank, generators[t].forward(latent), clamp);
    r.clamp_binding += pop[t].clamp_binding + emp[t].clamp_binding;
    values[t] = max_difference(emp[t].mean, data_m.mean);
  }
  r.chosen = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());

  const double mc = static_cast<double>(options.mc_points);
  auto se = [&](const BankMoments& a, std::size_t j) { return a.variance[j] / mc; };
  auto argmax_diff = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < a.size(); ++j)
      if (a[j] - b[j] > a[best] - b[best]) best = j;
    return best;
  };
  auto argmax_abs = [&](const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t i = argmax_diff(a, b), j = argmax_diff(b, a);
    return a[i] - b[i] >= b[j] - a[j] ? i : j;
  };

  const std::size_t j_lhs = argmax_diff(pop[r.chosen].mean, target_pop.mean);
  r.lhs = max_difference(pop[r.chosen].mean, target_pop.mean);
  double var_lhs = se(pop[r.chosen], j_lhs) + se(target_pop, j_lhs);

  r.data_term = max_abs_difference(data_m.mean, target_pop.mean);
  const double var_data = se(target_pop, argmax_abs(data_m.mean, target_pop.mean));

  r.latent_term = -INFINITY;
  double var_latent = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    const double v = max_abs_difference(pop[t].mean, emp[t].mean);
    if (v > r.latent_term) {
      r.latent_term = v;
      var_latent = se(pop[t], argmax_abs(pop[t].mean, emp[t].mean));
    }
  }

  r.rhs = INFINITY;
  double var_rhs = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    const double approx = max_difference(pop[t].mean, target_pop.mean);
    const double gen = max_abs_difference(emp[t].mean, pop[t].mean);
    const double rhs = approx + 2.0 * r.data_term + gen + r.latent_term;
    if (rhs < r.rhs) {
      r.rhs = rhs;
      r.tightest = t;
      r.approximation = approx;
      r.generator_term = gen;
      const std::size_t ja = argmax_diff(pop[t].mean, target_pop.mean);
      var_rhs = se(pop[t], ja) + se(target_pop, ja) + se(pop[t], argmax_abs(emp[t].mean, pop[t].mean));
    }
  }
  r.mc_stderr = std::sqrt(var_lhs + 4.0 * var_data + var_latent + var_rhs);
  r.holds = r.lhs <= r.rhs + 3.0 * r.mc_stderr;
  return r;
}

// --- Gaussian ---------------------------------------------------------------

GaussianModel::GaussianModel(Vector mean, Matrix factor) : mean_(std::move(mean)), factor_(std::move(factor)) {
  if (mean_.size() < 1) throw std::invalid_argument("Gaussian model needs dimension >= 1");
  if (factor_.rows() != mean_.size()) throw DimensionMismatch("factor rows must equal the dimension");
}

namespace {

Eigen::LLT<Matrix> positive_definite(const Matrix& cov, const char* what) {
  Eigen::LLT<Matrix> llt(cov);
  const double scale = std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 1e-9 * std::sqrt(scale))
    throw std::domain_error(std::string(what) + ": covariance is not positive definite");
  return llt;
}

}  // namespace

double GaussianModel::log_density(const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("point has wrong dimension");
  const auto llt = positive_definite(covariance(), "log_density");
  const Vector r = llt.matrixL().solve(x - mean_);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (r.squaredNorm() + log_det + dim() * std::log(2.0 * M_PI));
}

PointMatrix GaussianModel::sample(std::size_t n, Philox& rng) const {
  const auto p = factor_.cols();
  Matrix z(p, static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < p; ++i) z(i, j) = rng.normal();
  return (factor_ * z).colwise() + mean_;
}

GaussianModel gaussian_gan_fit(const PointMatrix& data, int p) {
  const auto d = data.rows();
  const auto n = data.cols();
  if (d < 1 || n < 2) throw std::invalid_argument("gaussian_gan_fit needs at least two points");
  if (p < d) throw std::invalid_argument("latent dimension p must be at least the data dimension");
  const Vector mean = data.rowwise().mean();
  const Matrix centered = data.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(top, 1e-300)))
    throw std::domain_error("gaussian_gan_fit: sample covariance is singular");
  const auto llt = positive_definite(cov, "gaussian_gan_fit");
  Matrix factor = Matrix::Zero(d, p);
  factor.leftCols(d) = llt.matrixL();
  return GaussianModel(mean, std::move(factor));
}

double quadratic_moment_gap(const GaussianModel& model, const PointMatrix& data) {
  const Vector mean = data.rowwise().mean();
  const Matrix second = data * data.transpose() / static_cast<double>(data.cols());
  const Matrix model_second = model.covariance() + model.mean() * model.mean().transpose();
  return (model.mean() - mean).norm() + (model_second - second).norm();
}

double gaussian_kl(const GaussianModel& p, const GaussianModel& q) {
  if (p.dim() != q.dim()) throw DimensionMismatch("gaussian_kl: dimensions differ");
  const Matrix sp = p.covariance(), sq = q.covariance();
  const auto lp = positive_definite(sp, "gaussian_kl");
  const auto lq = positive_definite(sq, "gaussian_kl");
  const Matrix lpd = lp.matrixL();
  const Matrix lqd = lq.matrixL();
  const double logdet_p = 2.0 * lpd.diagonal().array().log().sum();
  const double logdet_q = 2.0 * lqd.diagonal().array().log().sum();
  const Matrix a = lq.matrixL().solve(lpd);
  const Vector r = lq.matrixL().solve(q.mean() - p.mean());
  return 0.5 * (a.squaredNorm() + r.squaredNorm() - p.dim() + logdet_q - logdet_p);
}

// --- plain-text format ------------------------------------------------------

namespace {

void write_matrix(std::ostream& os, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_double(m(i, j));
    os << '\n';
  }
}

void write_vector(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_double(v(i));
  os << '\n';
}

double read_number(std::istream& is) {
  std::string token;
  if (!(is >> token)) throw std::runtime_error("unexpected end of network file");
  return parse_double(token);
}

Matrix read_matrix(std::istream& is, int d) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = read_number(is);
  return m;
}

Vector read_vector(std::istream& is, int d) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = read_number(is);
  return v;
}

void read_header(std::istream& is, int& d, int& L, double& a) {
  if (!(is >> d >> L)) throw std::runtime_error("network file: malformed header");
  a = read_number(is);
  if (d < 1 || d > 16 || L < 1) throw std::runtime_error("network file: invalid dimension or depth");
  check_leak(a);
}

void write_half(std::ostream& os, const HalfNetwork& h) {
  for (std::size_t l = 0; l < h.weights.size(); ++l) {
    write_matrix(os, h.weights[l]);
    write_vector(os, h.biases[l]);
  }
  os << format_double(h.offset) << '\n';
}

HalfNetwork read_half(std::istream& is, int d, int L, double a) {
  HalfNetwork h;
  h.dim = d;
  h.leak = a;
  for (int l = 1; l < L; ++l) {
    h.weights.push_back(read_matrix(is, d));
    h.biases.push_back(read_vector(is, d));
  }
  h.offset = read_number(is);
  return h;
}

}  // namespace

void write_generator(std::ostream& os, const MlpGenerator& g) {
  os << g.dim() << ' ' << g.depth() << ' ' << format_double(g.leak()) << '\n';
  for (int l = 0; l < g.depth(); ++l) {
    write_matrix(os, g.weights()[l]);
    write_vector(os, g.biases()[l]);
  }
}

MlpGenerator read_generator(std::istream& is) {
  int d = 0, L = 0;
  double a = 1.0;
  read_header(is, d, L, a);
  std::vector<Matrix> w;
  std::vector<Vector> b;
  for (int l = 0; l < L; ++l) {
    w.push_back(read_matrix(is, d));
    b.push_back(read_vector(is, d));
  }
  return MlpGenerator(a, std::move(w), std::move(b));
}

void write_discriminator(std::ostream& os, const RealizedDiscriminator& f) {
  const auto& p = f.positive();
  if (f.negative().weights.size() != p.weights.size() || f.negative().leak != p.leak)
    throw std::invalid_argument("discriminator halves differ in depth or leak");
  os << p.dim << ' ' << p.weights.size() + 1 << ' ' << format_double(p.leak) << '\n';
  write_half(os, p);
  write_half(os, f.negative());
}

RealizedDiscriminator read_discriminator(std::istream& is) {
  int d = 0, L = 0;
  double a = 1.0;
  read_header(is, d, L, a);
  HalfNetwork pos = read_half(is, d, L, a);
  HalfNetwork neg = read_half(is, d, L, a);
  return {std::move(pos), std::move(neg)};
}

}  // namespace advdens
