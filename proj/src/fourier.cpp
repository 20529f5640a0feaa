#include "advdens/fourier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "advdens/kernels.hpp"
#include "advdens/rng.hpp"

namespace advdens {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Grid resolution per coordinate for validation / sup search.
int validation_resolution(int dim, int cutoff) {
  const int max_freq = std::max(1, frequency_of(cutoff));
  int res = std::max(64, 16 * max_freq);
  while (res > 8 && ipow(static_cast<std::size_t>(res), dim) > (std::size_t{1} << 22)) res /= 2;
  return res;
}

}  // namespace

double basis_1d(int index, double t) {
  if (index < 0) throw std::invalid_argument("basis index must be nonnegative");
  if (index == 0) return 1.0;
  const int k = frequency_of(index);
  return index % 2 == 1 ? kSqrt2 * std::cos(kTwoPi * k * t) : kSqrt2 * std::sin(kTwoPi * k * t);
}

void basis_row(double t, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  const double c1 = std::cos(kTwoPi * t);
  const double s1 = std::sin(kTwoPi * t);
  double c = 1.0;
  double s = 0.0;
  for (std::size_t j = 1; j < out.size(); j += 2) {
    const double cn = c * c1 - s * s1;
    const double sn = s * c1 + c * s1;
    c = cn;
    s = sn;
    out[j] = kSqrt2 * c;
    if (j + 1 < out.size()) out[j + 1] = kSqrt2 * s;
  }
}

double basis_eval(const MultiIndex& index, std::span<const double> x) {
  if (index.size() != x.size()) throw DimensionMismatch("basis_eval: index and point dimensions differ");
  double v = 1.0;
  for (std::size_t i = 0; i < index.size(); ++i) v *= basis_1d(index[i], x[i]);
  return v;
}

// ---------------------------------------------------------------------------

CoefficientMap::CoefficientMap(int dim, int cutoff) : dim_(dim), cutoff_(cutoff) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (cutoff < 0) throw std::invalid_argument("cutoff must be >= 0");
  values_.assign(ipow(static_cast<std::size_t>(cutoff) + 1, dim), 0.0);
}

std::size_t CoefficientMap::flat_of(const MultiIndex& index) const {
  if (static_cast<int>(index.size()) != dim_) throw DimensionMismatch("coefficient index has wrong dimension");
  std::size_t flat = 0;
  for (int e : index) {
    if (e < 0 || e > cutoff_) throw std::out_of_range("coefficient index outside the cutoff box");
    flat = flat * (static_cast<std::size_t>(cutoff_) + 1) + static_cast<std::size_t>(e);
  }
  return flat;
}

MultiIndex CoefficientMap::index_of(std::size_t flat) const {
  MultiIndex idx(dim_);
  const auto side = static_cast<std::size_t>(cutoff_) + 1;
  for (int i = dim_ - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(flat % side);
    flat /= side;
  }
  return idx;
}

double CoefficientMap::operator[](const MultiIndex& index) const {
  if (static_cast<int>(index.size()) != dim_) throw DimensionMismatch("coefficient index has wrong dimension");
  for (int e : index)
    if (e < 0 || e > cutoff_) return 0.0;
  return values_[flat_of(index)];
}

void CoefficientMap::set(const MultiIndex& index, double value) {
  values_[flat_of(index)] = value;
}

CoefficientMap CoefficientMap::with_cutoff(int cutoff) const {
  CoefficientMap out(dim_, cutoff);
  for (std::size_t f = 0; f < out.size(); ++f) out.values_[f] = (*this)[out.index_of(f)];
  return out;
}

std::size_t CoefficientMap::support_size() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

CoefficientMap& CoefficientMap::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

// ---------------------------------------------------------------------------

WeightSequence WeightSequence::sobolev(double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("sobolev weight needs beta >= 0");
  WeightSequence w;
  w.kind_ = Kind::sobolev;
  w.parameter_ = beta;
  return w;
}

WeightSequence WeightSequence::eigen_decay(double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("eigen-decay weight needs kappa > 0");
  WeightSequence w;
  w.kind_ = Kind::eigen_decay;
  w.parameter_ = kappa;
  return w;
}

WeightSequence WeightSequence::explicit_list(std::vector<double> weights) {
  for (double v : weights)
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("explicit weights must be positive and finite");
  WeightSequence w;
  w.kind_ = Kind::explicit_list;
  w.list_ = std::move(weights);
  return w;
}

double WeightSequence::operator()(const MultiIndex& index) const {
  switch (kind_) {
    case Kind::sobolev: {
      double s = 1.0;
      for (int e : index) {
        const double k = frequency_of(e);
        s += k * k;
      }
      return std::pow(s, parameter_);
    }
    case Kind::eigen_decay:
      return std::pow(static_cast<double>(eigen_rank(index)), parameter_);
    case Kind::explicit_list: {
      const auto r = eigen_rank(index);
      if (r > list_.size()) throw std::out_of_range("explicit weight list too short for index");
      return list_[r - 1];
    }
  }
  return 1.0;
}

std::uint64_t eigen_rank(const MultiIndex& index) {
  const int d = static_cast<int>(index.size());
  int shell = 0;
  for (int e : index) shell = std::max(shell, e);
  if (shell == 0) return 1;
  auto upow = [](std::uint64_t b, int e) {
    std::uint64_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  };
  const auto s = static_cast<std::uint64_t>(shell);
  std::uint64_t rank = upow(s, d);  // indices in earlier shells
  bool prefix_hits_shell = false;
  for (int j = 0; j < d; ++j) {
    const int rem = d - j - 1;
    for (int t = 0; t < index[j]; ++t) {
      const bool hit = prefix_hits_shell || t == shell;
      rank += hit ? upow(s + 1, rem) : upow(s + 1, rem) - upow(s, rem);
    }
    if (index[j] == shell) prefix_hits_shell = true;
  }
  return rank + 1;
}

// ---------------------------------------------------------------------------

SampleSet::SampleSet(int dim, std::vector<double> coords, std::uint64_t seed)
    : dim_(dim), coords_(std::move(coords)), seed_(seed) {
  if (dim < 1) throw std::invalid_argument("sample dimension must be >= 1");
  if (coords_.empty() || coords_.size() % static_cast<std::size_t>(dim) != 0)
    throw std::invalid_argument("sample set needs n >= 1 complete points");
  for (double c : coords_)
    if (!(c >= 0.0 && c <= 1.0)) throw std::domain_error("sample coordinate outside [0,1]");
}

// ---------------------------------------------------------------------------

FourierDensity::FourierDensity(CoefficientMap coefficients) : coeffs_(std::move(coefficients)) {
  if (coeffs_.dim() < 1) throw std::invalid_argument("density needs dimension >= 1");
  if (coeffs_.values()[0] != 1.0) throw std::invalid_argument("density coefficient of the zero index must be 1");
  for (double v : coeffs_.values())
    if (!std::isfinite(v)) throw std::invalid_argument("density coefficients must be finite");
}

FourierDensity FourierDensity::uniform(int dim) {
  CoefficientMap c(dim, 0);
  c.values()[0] = 1.0;
  FourierDensity f(std::move(c));
  f.validated_ = true;
  return f;
}

double FourierDensity::operator()(std::span<const double> x) const {
  const int d = dim();
  if (static_cast<int>(x.size()) != d) throw DimensionMismatch("eval_density: point has wrong dimension");
  const int side = cutoff() + 1;
  if (d == 1) {
    double row[512];
    std::vector<double> heap;
    std::span<double> r = side <= 512 ? std::span<double>(row, side) : (heap.resize(side), std::span<double>(heap));
    basis_row(x[0], r);
    double s = 0.0;
    const auto v = coeffs_.values();
    for (int j = 0; j < side; ++j) s += v[j] * r[j];
    return s;
  }
  std::vector<double> rows(static_cast<std::size_t>(d) * side);
  for (int i = 0; i < d; ++i) basis_row(x[i], std::span<double>(rows.data() + i * side, side));
  // Horner-style contraction over the last coordinate first.
  std::vector<double> work(coeffs_.values().begin(), coeffs_.values().end());
  std::size_t len = work.size();
  for (int i = d - 1; i >= 0; --i) {
    const double* r = rows.data() + i * side;
    const std::size_t outer = len / side;
    for (std::size_t o = 0; o < outer; ++o) {
      double s = 0.0;
      for (int j = 0; j < side; ++j) s += work[o * side + j] * r[j];
      work[o] = s;
    }
    len = outer;
  }
  return work[0];
}

double FourierDensity::grid_minimum() const {
  GridSpec grid{Box::unit(dim()), validation_resolution(dim(), cutoff())};
  double lo = INFINITY;
  std::vector<double> x(dim());
  for (std::size_t i = 0; i < grid.num_points(); ++i) {
    grid.point(i, x);
    lo = std::min(lo, (*this)(x));
  }
  // also the corners of the grid, where trig extrema often sit
  std::vector<double> corner(dim(), 0.0);
  lo = std::min(lo, (*this)(corner));
  return lo;
}

FourierDensity FourierDensity::validate(double tolerance) const {
  // f >= theta_0 - sum_{xi != 0} |theta_xi| sup|psi_xi| = 2 - absolute_bound()
  const double lo = 2.0 - absolute_bound() >= 0.0 ? 0.0 : grid_minimum();
  if (lo < -tolerance)
    throw std::domain_error("not a density: grid minimum " + format_double(lo) + " below tolerance");
  FourierDensity f = *this;
  f.validated_ = true;
  return f;
}

double FourierDensity::absolute_bound() const {
  double s = 0.0;
  for (std::size_t f = 0; f < coeffs_.size(); ++f) {
    const double v = coeffs_.values()[f];
    if (v == 0.0) continue;
    int nonconst = 0;
    for (int e : coeffs_.index_of(f)) nonconst += e != 0;
    s += std::abs(v) * std::pow(kSqrt2, nonconst);
  }
  return s;
}

// ---------------------------------------------------------------------------

CoefficientMap estimate_coefficient_map(const SampleSet& samples, int cutoff) {
  CoefficientMap c(samples.dim(), cutoff);
  std::vector<double> sums = kernels::parallel::accumulate_coefficients(samples, cutoff);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  auto v = c.values();
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = sums[j] * inv_n;
  v[0] = 1.0;
  return c;
}

FourierDensity estimate_coefficients(const SampleSet& samples, int cutoff) {
  return FourierDensity(estimate_coefficient_map(samples, cutoff));
}

double ellipsoid_norm(const CoefficientMap& f, const WeightSequence& w) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double v = f.values()[j];
    if (v != 0.0) s += w(f.index_of(j)) * v * v;
  }
  return std::sqrt(s);
}

double eval_density(const FourierDensity& f, std::span<const double> x) { return f(x); }

SampleSet uniform_samples(int dim, std::size_t n, std::uint64_t seed) {
  Philox rng(seed);
  std::vector<double> coords(n * static_cast<std::size_t>(dim));
  for (double& c : coords) c = rng.uniform();
  return SampleSet(dim, std::move(coords), seed);
}

SampleSet sample_density(const FourierDensity& f, std::size_t n, std::uint64_t seed,
                         const SamplingOptions& options) {
  if (n == 0) throw std::invalid_argument("sample_density: n must be >= 1");
  const FourierDensity g = f.validated() ? f : f.validate();
  const int d = g.dim();
  double bound = 0.0;
  if (options.sup_bound) {
    bound = *options.sup_bound;
  } else {
    // grid maximum plus a Lipschitz slack for the half cell diagonal
    const int res = validation_resolution(d, g.cutoff());
    GridSpec grid{Box::unit(d), res};
    double hi = 0.0;
    std::vector<double> x(d);
    for (std::size_t i = 0; i < grid.num_points(); ++i) {
      grid.point(i, x);
      hi = std::max(hi, g(x));
    }
    double lipschitz = 0.0;
    const auto& c = g.coefficients();
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (c.values()[j] == 0.0) continue;
      double k2 = 0.0;
      for (int e : c.index_of(j)) k2 += static_cast<double>(frequency_of(e)) * frequency_of(e);
      lipschitz += std::abs(c.values()[j]) * std::pow(kSqrt2, d) * kTwoPi * std::sqrt(k2);
    }
    const double slack = lipschitz * 0.5 * std::sqrt(static_cast<double>(d)) / res;
    bound = std::min(g.absolute_bound(), 1.05 * (hi + slack));
  }
  if (!(bound > 0.0) || !std::isfinite(bound)) throw std::invalid_argument("sample_density: invalid sup bound");
  if (1.0 / bound < options.min_acceptance)
    throw std::runtime_error("sample_density: acceptance rate below threshold, bound too loose");

  Philox rng(seed);
  std::vector<double> coords;
  coords.reserve(n * static_cast<std::size_t>(d));
  std::vector<double> x(d);
  std::size_t proposals = 0;
  const std::size_t max_proposals = static_cast<std::size_t>(static_cast<double>(n) / options.min_acceptance) + 1000;
  while (coords.size() < n * static_cast<std::size_t>(d)) {
    if (++proposals > max_proposals)
      throw std::runtime_error("sample_density: acceptance rate below threshold, bound too loose");
    for (double& xi : x) xi = rng.uniform();
    const double u = rng.uniform() * bound;
    if (u < g(x)) coords.insert(coords.end(), x.begin(), x.end());
  }
  return SampleSet(d, std::move(coords), seed);
}

FourierDensity smooth_test_density(int dim, double alpha, int max_freq) {
  if (max_freq < 1) return FourierDensity::uniform(dim);
  // 1-d factor: 1 + sum_k c k^-(alpha+1) (psi_{2k-1} + psi_{2k})
  double raw = 0.0;
  for (int k = 1; k <= max_freq; ++k) raw += 2.0 * std::pow(k, -(alpha + 1.0)) * kSqrt2;
  const double per_factor = std::pow(1.9, 1.0 / dim) - 1.0;
  const double c = per_factor / raw;
  std::vector<double> one(2 * max_freq + 1, 0.0);
  one[0] = 1.0;
  for (int k = 1; k <= max_freq; ++k) {
    one[2 * k - 1] = c * std::pow(k, -(alpha + 1.0));
    one[2 * k] = c * std::pow(k, -(alpha + 1.0));
  }
  CoefficientMap m(dim, 2 * max_freq);
  auto v = m.values();
  for (std::size_t j = 0; j < v.size(); ++j) {
    double prod = 1.0;
    for (int e : m.index_of(j)) prod *= one[e];
    v[j] = prod;
  }
  v[0] = 1.0;
  return FourierDensity(std::move(m)).validate();
}

FourierDensity random_fourier_density(int dim, int cutoff, Philox& rng, double spread) {
  if (!(spread >= 0.0 && spread < 1.0)) throw std::invalid_argument("spread must lie in [0, 1)");
  CoefficientMap m(dim, cutoff);
  auto v = m.values();
  double total = 0.0;
  for (std::size_t j = 1; j < v.size(); ++j) {
    v[j] = 2.0 * rng.uniform() - 1.0;
    int nonconst = 0;
    for (int e : m.index_of(j)) nonconst += e != 0;
    total += std::abs(v[j]) * std::pow(kSqrt2, nonconst);
  }
  if (total > 0.0)
    for (std::size_t j = 1; j < v.size(); ++j) v[j] *= spread / total;
  v[0] = 1.0;
  return FourierDensity(std::move(m)).validate();
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto res = std::from_chars(first, s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("cannot parse number '" + s + "'");
  return v;
}

void write_density(std::ostream& os, const FourierDensity& f) {
  const auto& c = f.coefficients();
  os << c.dim() << ' ' << c.cutoff() << '\n';
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double v = c.values()[j];
    if (v == 0.0 && j != 0) continue;
    for (int e : c.index_of(j)) os << e << ' ';
    os << format_double(v) << '\n';
  }
}

FourierDensity read_density(std::istream& is) {
  std::string line;
  int d = 0, m = -1;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hs(line);
    if (!(hs >> d >> m) || d < 1 || m < 0) throw std::invalid_argument("density file: bad header '" + line + "'");
    break;
  }
  if (d < 1) throw std::invalid_argument("density file: missing header");
  CoefficientMap c(d, m);
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    MultiIndex idx(d);
    for (int& e : idx)
      if (!(ls >> e)) throw std::invalid_argument("density file: bad index in '" + line + "'");
    std::string value;
    if (!(ls >> value)) throw std::invalid_argument("density file: missing value in '" + line + "'");
    c.set(idx, parse_double(value));
  }
  return FourierDensity(std::move(c));
}

}  // namespace advdens
