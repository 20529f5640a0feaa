#include "advdens/lower_bounds.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "advdens/kernels.hpp"
#include "advdens/rng.hpp"

namespace advdens {

namespace {

constexpr int kBumpGridCells = 1 << 14;
constexpr int kMaxOrder = 6;

double bump_profile(double u) {
  const double s = 1.0 - 4.0 * u * u;
  return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

template <class F>
double integrate_bump(F f) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, -0.5, 0.5);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

double BumpKernel::operator()(double u) const {
  const double e = bump_profile(u);
  if (e == 0.0) return 0.0;
  return a1 * e - a2 * e * e / e2_integral;
}

std::vector<double> bump_derivative_sups(const BumpKernel& kernel, int order) {
  if (order < 0 || order > kMaxOrder) throw std::invalid_argument("derivative order must lie in [0, 6]");
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> sups(order + 1, 0.0);
  for (int j = 0; j <= order; ++j) {
    const int cells = std::max(1, static_cast<int>(std::lround(kBumpGridCells * std::pow(eps, 1.0 / (j + 2)))));
    const double step = static_cast<double>(cells) / kBumpGridCells;
    double sup = 0.0;
    for (int i = 0; i <= kBumpGridCells; ++i) {
      const double u = -0.5 + static_cast<double>(i) / kBumpGridCells;
      double acc = 0.0;
      for (int k = 0; k <= j; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        acc += sign * binomial(j, k) * kernel(u + (0.5 * j - k) * step);
      }
      sup = std::max(sup, std::abs(acc) / std::pow(step, j));
    }
    sups[j] = sup;
  }
  return sups;
}

BumpKernel calibrate_bump(int order) {
  if (order < 0 || order > kMaxOrder) throw std::invalid_argument("bump order must lie in [0, 6]");
  BumpKernel k;
  k.order = order;
  k.e_integral = integrate_bump([](double u) { return bump_profile(u); });
  k.e2_integral = integrate_bump([](double u) { return bump_profile(u) * bump_profile(u); });
  k.a1 = 1.0;
  k.a2 = k.e_integral;
  const std::vector<double> unit = bump_derivative_sups(k, order);
  const double top = *std::max_element(unit.begin(), unit.end());
  k.a1 = 1.0 / top;
  k.a2 = k.a1 * k.e_integral;
  k.sup_derivatives.resize(unit.size());
  for (std::size_t j = 0; j < unit.size(); ++j) k.sup_derivatives[j] = unit[j] * k.a1;
  k.k2_integral = integrate_bump([&k](double u) {
    const double v = k(u);
    return v * v;
  });
  return k;
}

// --- codes ------------------------------------------------------------------

BitVector::BitVector(int length) : length_(length), words_((std::max(length, 0) + 63) / 64, 0) {
  if (length < 0) throw std::invalid_argument("bit vector length must be nonnegative");
}

void BitVector::set(int i, bool v) {
  if (i < 0 || i >= length_) throw std::out_of_range("bit index out of range");
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (v) words_[i / 64] |= mask;
  else words_[i / 64] &= ~mask;
}

int BitVector::count() const {
  int c = 0;
  for (auto w : words_) c += std::popcount(w);
  return c;
}

int hamming(const BitVector& a, const BitVector& b) {
  if (a.length_ != b.length_) throw std::invalid_argument("bit vectors differ in length");
  int c = 0;
  for (std::size_t i = 0; i < a.words_.size(); ++i) c += std::popcount(a.words_[i] ^ b.words_[i]);
  return c;
}

std::vector<BitVector> vg_code(int h, std::uint64_t seed, std::uint64_t budget) {
  if (h < 8) throw std::invalid_argument("vg_code needs h >= 8");
  if (h > 160) throw std::invalid_argument("vg_code supports h <= 160");
  const auto target = static_cast<std::size_t>(std::floor(std::exp2(h / 8.0))) + 1;
  const int min_distance = (h + 7) / 8;
  if (budget == 0) budget = 64 * static_cast<std::uint64_t>(target) + 4096;
  Philox rng(seed);
  std::vector<BitVector> code{BitVector(h)};
  for (std::uint64_t tries = 0; code.size() < target; ++tries) {
    if (tries >= budget)
      throw std::runtime_error("vg_code: candidate budget exhausted after " + std::to_string(code.size()) +
                               " of " + std::to_string(target) + " codewords");
    BitVector cand(h);
    for (int i = 0; i < h; ++i) cand.set(i, rng.next_u32() & 1u);
    const bool far = std::all_of(code.begin(), code.end(),
                                 [&](const BitVector& c) { return hamming(c, cand) >= min_distance; });
    if (far) code.push_back(std::move(cand));
  }
  return code;
}

// --- hypotheses -------------------------------------------------------------

namespace {

std::size_t bump_count(int m, int dim) {
  if (m < 1 || dim < 1) throw std::invalid_argument("need m, dim >= 1");
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) {
    if (n > static_cast<std::size_t>(std::numeric_limits<int>::max()) / static_cast<std::size_t>(m))
      throw std::invalid_argument("too many bumps");
    n *= static_cast<std::size_t>(m);
  }
  return n;
}

bool in_unit_cube(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double t) { return t >= 0.0 && t <= 1.0; });
}

// Flat bump index of x and the value of that bump at x.
std::size_t locate(std::span<const double> x, int m, const BumpKernel& k, double& phi) {
  std::size_t flat = 0;
  phi = 1.0;
  for (double t : x) {
    const int cell = std::min(m - 1, static_cast<int>(t * m));
    flat = flat * static_cast<std::size_t>(m) + static_cast<std::size_t>(cell);
    phi *= k(t * m - (cell + 0.5));
  }
  return flat;
}

}  // namespace

HypothesisDensity::HypothesisDensity(BitVector w, int m, int dim, double alpha, BumpKernel kernel)
    : w_(std::move(w)), m_(m), dim_(dim), alpha_(alpha), kernel_(std::move(kernel)) {
  if (static_cast<std::size_t>(w_.size()) != bump_count(m, dim))
    throw std::invalid_argument("hypothesis needs m^d bits");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
}

std::size_t HypothesisDensity::cell_of(std::span<const double> x, double& phi) const {
  if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("point has wrong dimension");
  return locate(x, m_, kernel_, phi);
}

double HypothesisDensity::operator()(std::span<const double> x) const {
  if (!in_unit_cube(x)) return 0.0;
  double phi = 0.0;
  const std::size_t xi = cell_of(x, phi);
  if (!w_[static_cast<int>(xi)]) return 1.0;
  return 1.0 + std::pow(1.0 / m_, alpha_) * phi;
}

double witness_value(const BitVector& w, const BitVector& w_prime, int m, int dim, double beta,
                     const BumpKernel& kernel, std::span<const double> x) {
  if (w.size() != w_prime.size() || static_cast<std::size_t>(w.size()) != bump_count(m, dim))
    throw std::invalid_argument("witness needs two m^d-bit vectors");
  if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("point has wrong dimension");
  if (!in_unit_cube(x)) return 0.0;
  double phi = 0.0;
  const int xi = static_cast<int>(locate(x, m, kernel, phi));
  const double v = (!w[xi] && w_prime[xi]) ? -1.0 : 1.0;
  return v * std::pow(1.0 / m, beta) * phi;
}

double separation(const BitVector& w, const BitVector& w_prime, int m, int dim, double alpha, double beta,
                  const BumpKernel& kernel) {
  if (w.size() != w_prime.size() || static_cast<std::size_t>(w.size()) != bump_count(m, dim))
    throw std::invalid_argument("separation needs two m^d-bit vectors");
  const double h = 1.0 / m;
  return std::pow(h, alpha + beta + dim) * hamming(w, w_prime) * std::pow(kernel.k2_integral, dim);
}

KlCloseness kl_closeness(const BitVector& w, int m, int dim, double alpha, double n, const BumpKernel& kernel) {
  if (static_cast<std::size_t>(w.size()) != bump_count(m, dim)) throw std::invalid_argument("kl_closeness needs m^d bits");
  if (dim > 3) throw std::invalid_argument("kl_closeness quadrature supports d <= 3");
  if (!(n > 0.0)) throw std::invalid_argument("sample size must be positive");
  const double h = 1.0 / m;
  const double c = std::pow(h, alpha);
  const int active = w.count();
  const int resolution = dim == 1 ? 4096 : dim == 2 ? 256 : 48;
  GridSpec grid{Box{std::vector<double>(dim, -0.5), std::vector<double>(dim, 0.5)}, resolution};
  const auto ints = kernels::grid_integrals(grid, 2, [&](std::span<const double> u, std::span<double> out) {
    double p = 1.0;
    for (double t : u) p *= kernel(t);
    const double g = 1.0 + c * p;
    out[0] = g * std::log(g);
    out[1] = (c * p) * (c * p) / g;
  });
  // extremes of prod K(u_i) over the kernel's range on its certification grid
  double kmin = 0.0, kmax = 0.0;
  for (int i = 0; i <= kBumpGridCells; ++i) {
    const double v = kernel(-0.5 + static_cast<double>(i) / kBumpGridCells);
    kmin = std::min(kmin, v);
    kmax = std::max(kmax, v);
  }
  double pmin = 0.0;
  for (int mask = 0; mask < (1 << dim); ++mask) {
    double p = 1.0;
    for (int i = 0; i < dim; ++i) p *= (mask >> i) & 1 ? kmax : kmin;
    pmin = std::min(pmin, p);
  }
  KlCloseness out;
  const double scale = n * active * std::pow(h, dim);
  out.exact = scale * ints[0];
  out.chi2 = scale * ints[1];
  out.sup_inverse = active > 0 ? 1.0 / (1.0 + c * pmin) : 1.0;
  const double quadratic = scale * c * c * std::pow(kernel.k2_integral, dim);
  out.bound = 1.01 * quadratic;
  out.weighted_bound = out.sup_inverse * quadratic;
  return out;
}

// --- Le Cam pair ------------------------------------------------------------

LeCamPair lecam_pair(int n, int dim) {
  if (n < 4) throw std::invalid_argument("lecam_pair needs n >= 4");
  if (dim < 1) throw std::invalid_argument("lecam_pair needs dim >= 1");
  return LeCamPair{n, dim};
}

double LeCamPair::nu0(std::span<const double> x) const { return in_unit_cube(x) ? 1.0 : 0.0; }

double LeCamPair::nu1(std::span<const double> x) const {
  if (!in_unit_cube(x)) return 0.0;
  if (x[0] < 2.0 / n) return 1.5;
  if (x[0] < 4.0 / n) return 0.5;
  return 1.0;
}

double LeCamPair::chi2() const {
  const double w = 2.0 / n;
  return 0.25 * w + 0.25 * w;
}

double LeCamPair::product_chi2() const { return std::pow(1.0 + chi2(), n) - 1.0; }

double LeCamPair::witness_gap() const { return std::sqrt(static_cast<double>(n)) * chi2(); }

}  // namespace advdens
