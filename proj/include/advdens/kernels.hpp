#pragma once

// Data-parallel reductions used across the library.
//
// Every reduction exists twice: a plain serial loop kept as the reference
// implementation for tests, and an OpenMP version. The OpenMP version splits
// the work into fixed-size chunks, reduces each chunk into its own buffer and
// combines the buffers in chunk order, so its result does not depend on the
// number of threads or on scheduling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace advdens {

/// Axis-aligned box in R^d.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box unit(int dim) {
    return Box{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
  }
  int dim() const { return static_cast<int>(lower.size()); }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= upper[i] - lower[i];
    return v;
  }
};

/// Tensor-product midpoint grid with `resolution` cells per coordinate.
struct GridSpec {
  Box box;
  int resolution = 64;

  std::size_t num_points() const {
    std::size_t n = 1;
    for (int i = 0; i < box.dim(); ++i) n *= static_cast<std::size_t>(resolution);
    return n;
  }
  double cell_volume() const { return box.volume() / static_cast<double>(num_points()); }

  /// Midpoint of cell `flat` (row-major, last coordinate fastest).
  void point(std::size_t flat, std::span<double> out) const {
    for (int i = box.dim() - 1; i >= 0; --i) {
      const std::size_t cell = flat % static_cast<std::size_t>(resolution);
      flat /= static_cast<std::size_t>(resolution);
      const double width = (box.upper[i] - box.lower[i]) / resolution;
      out[i] = box.lower[i] + (static_cast<double>(cell) + 0.5) * width;
    }
  }

  GridSpec refined(int factor = 2) const { return GridSpec{box, resolution * factor}; }
};

namespace kernels {

inline constexpr std::size_t kChunk = 2048;

namespace serial {

/// acc[j] += contributions of item i, for i in [0, n).
template <class Fn>
std::vector<double> chunked_reduce(std::size_t n, std::size_t width, Fn&& fn) {
  std::vector<double> acc(width, 0.0);
  for (std::size_t i = 0; i < n; ++i) fn(i, std::span<double>(acc));
  return acc;
}

}  // namespace serial

namespace parallel {

template <class Fn>
std::vector<double> chunked_reduce(std::size_t n, std::size_t width, Fn&& fn) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  if (chunks <= 1) return serial::chunked_reduce(n, width, fn);
  std::vector<double> partial(chunks * width, 0.0);
  const auto nc = static_cast<long long>(chunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long c = 0; c < nc; ++c) {
    std::span<double> acc(partial.data() + static_cast<std::size_t>(c) * width, width);
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    for (std::size_t i = begin; i < end; ++i) fn(i, acc);
  }
  // pairwise combination in a fixed tree order
  for (std::size_t stride = 1; stride < chunks; stride *= 2) {
    for (std::size_t c = 0; c + stride < chunks; c += 2 * stride) {
      double* dst = partial.data() + c * width;
      const double* src = partial.data() + (c + stride) * width;
      for (std::size_t j = 0; j < width; ++j) dst[j] += src[j];
    }
  }
  partial.resize(width);
  return partial;
}

}  // namespace parallel

/// Midpoint-rule integrals of K integrands over a grid. `fn(x, out)` writes
/// the K integrand values at point x.
template <bool Parallel = true, class Fn>
std::vector<double> grid_integrals(const GridSpec& grid, std::size_t k, Fn&& fn) {
  const int d = grid.box.dim();
  auto body = [&](std::size_t i, std::span<double> acc) {
    double xbuf[16];
    double vbuf[16];
    std::span<double> x(xbuf, static_cast<std::size_t>(d));
    std::span<double> v(vbuf, k);
    grid.point(i, x);
    fn(std::span<const double>(x), v);
    for (std::size_t j = 0; j < k; ++j) acc[j] += v[j];
  };
  if (d > 16 || k > 16) throw std::invalid_argument("grid_integrals: at most 16 dimensions and integrands");
  std::vector<double> sums = Parallel ? parallel::chunked_reduce(grid.num_points(), k, body)
                                      : serial::chunked_reduce(grid.num_points(), k, body);
  const double dv = grid.cell_volume();
  for (double& s : sums) s *= dv;
  return sums;
}

}  // namespace kernels
}  // namespace advdens
