#include "advdens/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advdens {

namespace {

constexpr double kNegativeDensityTolerance = 1e-9;

enum Slot : std::size_t { kMassP, kMassQ, kAbs, kHell, kKlPQ, kKlQP, kJs, kInfPQ, kInfQP, kNegative, kSlots };

template <bool Parallel>
std::vector<double> grid_pass(const DensityFn& p, const DensityFn& q, const GridSpec& grid, double sp, double sq) {
  const int d = grid.box.dim();
  if (d < 1 || d > 16) throw std::invalid_argument("grid dimension must lie in [1, 16]");
  auto body = [&](std::size_t i, std::span<double> acc) {
    double buf[16];
    std::span<double> x(buf, static_cast<std::size_t>(d));
    grid.point(i, x);
    double a = p(x), b = q(x);
    if (a < -kNegativeDensityTolerance || b < -kNegativeDensityTolerance || !std::isfinite(a) || !std::isfinite(b))
      acc[kNegative] += 1.0;
    a = std::max(a, 0.0) * sp;
    b = std::max(b, 0.0) * sq;
    acc[kMassP] += a;
    acc[kMassQ] += b;
    acc[kAbs] += std::abs(a - b);
    const double r = std::sqrt(a) - std::sqrt(b);
    acc[kHell] += r * r;
    if (a > 0.0) {
      if (b > 0.0) acc[kKlPQ] += a * std::log(a / b);
      else acc[kInfPQ] += 1.0;
    }
    if (b > 0.0) {
      if (a > 0.0) acc[kKlQP] += b * std::log(b / a);
      else acc[kInfQP] += 1.0;
    }
    const double m = 0.5 * (a + b);
    if (a > 0.0) acc[kJs] += 0.5 * a * std::log(a / m);
    if (b > 0.0) acc[kJs] += 0.5 * b * std::log(b / m);
  };
  std::vector<double> sums = Parallel ? kernels::parallel::chunked_reduce(grid.num_points(), kSlots, body)
                                      : kernels::serial::chunked_reduce(grid.num_points(), kSlots, body);
  if (sums[kNegative] > 0.0) throw std::domain_error("density is negative or non-finite on the grid");
  const double dv = grid.cell_volume();
  for (std::size_t j = 0; j < kInfPQ; ++j) sums[j] *= dv;
  return sums;
}

template <bool Parallel>
DivergenceSet divergences_impl(const DensityFn& p, const DensityFn& q, const GridSpec& grid, bool normalize) {
  double sp = 1.0, sq = 1.0;
  if (normalize) {
    const auto masses = grid_pass<Parallel>(p, q, grid, 1.0, 1.0);
    if (!(masses[kMassP] > 0.0 && masses[kMassQ] > 0.0)) throw std::domain_error("density has zero mass on the grid");
    sp = 1.0 / masses[kMassP];
    sq = 1.0 / masses[kMassQ];
  }
  const auto s = grid_pass<Parallel>(p, q, grid, sp, sq);
  DivergenceSet out;
  out.mass_p = s[kMassP];
  out.mass_q = s[kMassQ];
  out.tv = 0.5 * s[kAbs];
  out.hellinger = std::sqrt(s[kHell]);
  out.kl_pq_infinite = s[kInfPQ] > 0.0;
  out.kl_qp_infinite = s[kInfQP] > 0.0;
  out.kl_pq = out.kl_pq_infinite ? INFINITY : s[kKlPQ];
  out.kl_qp = out.kl_qp_infinite ? INFINITY : s[kKlQP];
  out.js = s[kJs];
  return out;
}

}  // namespace

DivergenceSet grid_divergences(const DensityFn& p, const DensityFn& q, const GridSpec& grid, bool normalize) {
  return divergences_impl<true>(p, q, grid, normalize);
}

namespace kernels::serial {
DivergenceSet grid_divergences(const DensityFn& p, const DensityFn& q, const GridSpec& grid, bool normalize) {
  return divergences_impl<false>(p, q, grid, normalize);
}
}  // namespace kernels::serial

namespace {

template <class Get>
GridEstimate two_resolution(const DensityFn& p, const DensityFn& q, const GridSpec& grid, Get get) {
  const double coarse = get(grid_divergences(p, q, grid));
  const double fine = get(grid_divergences(p, q, grid.refined()));
  return {fine, std::abs(fine - coarse)};
}

}  // namespace

GridEstimate tv_grid(const DensityFn& p, const DensityFn& q, const GridSpec& grid) {
  auto e = two_resolution(p, q, grid, [](const DivergenceSet& s) { return s.tv; });
  e.value = std::clamp(e.value, 0.0, 1.0);
  return e;
}

GridEstimate hellinger_grid(const DensityFn& p, const DensityFn& q, const GridSpec& grid) {
  auto e = two_resolution(p, q, grid, [](const DivergenceSet& s) { return s.hellinger; });
  e.value = std::clamp(e.value, 0.0, std::sqrt(2.0));
  return e;
}

GridEstimate js_from_kl(const DensityFn& p, const DensityFn& q, const GridSpec& grid) {
  auto e = two_resolution(p, q, grid, [](const DivergenceSet& s) { return s.js; });
  e.value = std::clamp(e.value, 0.0, std::log(2.0));
  return e;
}

KlEstimate kl_grid(const DensityFn& p, const DensityFn& q, const GridSpec& grid) {
  const DivergenceSet coarse = grid_divergences(p, q, grid);
  const DivergenceSet fine = grid_divergences(p, q, grid.refined());
  if (coarse.kl_pq_infinite || fine.kl_pq_infinite) return {INFINITY, 0.0, true};
  return {fine.kl_pq, std::abs(fine.kl_pq - coarse.kl_pq), false};
}

KlEstimate kl_mc(const LogDensityFn& log_p, const LogDensityFn& log_q, const SamplerFn& sample_p, int dim,
                 std::size_t n_mc, std::uint64_t seed) {
  if (n_mc < 2) throw std::invalid_argument("kl_mc needs at least two draws");
  if (dim < 1) throw std::invalid_argument("kl_mc needs dim >= 1");
  Philox rng(seed);
  std::vector<double> x(static_cast<std::size_t>(dim));
  std::vector<double> terms(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    sample_p(rng, x);
    const double lq = log_q(x);
    if (lq == -INFINITY) return {INFINITY, 0.0, true};
    terms[i] = log_p(x) - lq;
  }
  auto sum_fn = [&](std::size_t i, std::span<double> acc) {
    acc[0] += terms[i];
    acc[1] += terms[i] * terms[i];
  };
  const auto s = kernels::parallel::chunked_reduce(n_mc, 2, sum_fn);
  const double n = static_cast<double>(n_mc);
  const double mean = s[0] / n;
  const double var = std::max(0.0, (s[1] - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n), false};
}

double wasserstein1_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1_1d needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t na = a.size(), nb = b.size();
  if (na == nb) {
    double s = 0.0;
    for (std::size_t i = 0; i < na; ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(na);
  }
  // Walk the merged quantile breakpoints i/na and j/nb in exact integer
  // arithmetic (units of 1/(na nb)).
  std::size_t i = 0, j = 0;
  std::size_t ta = nb, tb = na;  // next breakpoint of each quantile function
  std::size_t t = 0;
  double s = 0.0;
  const std::size_t total = na * nb;
  while (t < total) {
    const std::size_t next = std::min(ta, tb);
    s += static_cast<double>(next - t) * std::abs(a[i] - b[j]);
    t = next;
    if (t == ta && i + 1 < na) {
      ++i;
      ta += nb;
    }
    if (t == tb && j + 1 < nb) {
      ++j;
      tb += na;
    }
  }
  return s / static_cast<double>(total);
}

namespace {

void evaluate_chain(InequalityReport& r) {
  const auto& v = r.values;
  const double tol = r.tolerance;
  const double tv2 = v.tv * v.tv;
  r.pinsker = v.kl_pq_infinite || 2.0 * tv2 <= v.kl_pq + tol;
  r.le_cam = tv2 <= v.hellinger * v.hellinger + tol;
  r.symmetrized = v.kl_pq_infinite || v.kl_qp_infinite || 4.0 * tv2 <= v.kl_pq + v.kl_qp + tol;
  r.tv_hellinger = v.tv <= v.hellinger + tol;
}

double finite_gap(double a, double b) {
  return std::isfinite(a) && std::isfinite(b) ? std::abs(a - b) : 0.0;
}

}  // namespace

InequalityReport check_pinsker(const DensityFn& p, const DensityFn& q, const GridSpec& grid) {
  InequalityReport r;
  r.coarse = grid_divergences(p, q, grid, true);
  r.values = grid_divergences(p, q, grid.refined(), true);
  const auto& a = r.values;
  const auto& b = r.coarse;
  const double err = std::abs(a.tv - b.tv) + std::abs(a.hellinger - b.hellinger) + finite_gap(a.kl_pq, b.kl_pq) +
                     finite_gap(a.kl_qp, b.kl_qp);
  r.tolerance = 3.0 * err + 1e-12;
  evaluate_chain(r);
  return r;
}

InequalityReport check_pinsker_discrete(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) throw std::invalid_argument("probability vectors differ in length");
  const auto n = p.size();
  GridSpec grid{Box::unit(1), static_cast<int>(n)};
  auto cell = [n](std::span<const double> x) {
    return std::min(n - 1, static_cast<std::size_t>(x[0] * static_cast<double>(n)));
  };
  const double scale = static_cast<double>(n);
  DensityFn pd = [&](std::span<const double> x) { return p[cell(x)] * scale; };
  DensityFn qd = [&](std::span<const double> x) { return q[cell(x)] * scale; };
  InequalityReport r;
  r.values = kernels::serial::grid_divergences(pd, qd, grid, false);
  r.coarse = r.values;
  r.tolerance = 1e-12;
  evaluate_chain(r);
  return r;
}

}  // namespace advdens
