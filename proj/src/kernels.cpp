#include "advdens/kernels.hpp"

#include "advdens/fourier.hpp"

namespace advdens::kernels {
namespace {

std::size_t box_size(int dim, int cutoff) {
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(cutoff) + 1;
  return n;
}

// Adds the tensor product of the per-coordinate basis rows of x into acc.
struct TensorAccumulator {
  int dim;
  int side;
  std::vector<double> rows;
  std::vector<double> tensor;

  TensorAccumulator(int d, int cutoff)
      : dim(d), side(cutoff + 1), rows(static_cast<std::size_t>(d) * (cutoff + 1)), tensor(box_size(d, cutoff)) {}

  void add(std::span<const double> x, std::span<double> acc) {
    for (int i = 0; i < dim; ++i) basis_row(x[i], std::span<double>(rows.data() + i * side, side));
    if (dim == 1) {
      for (int j = 0; j < side; ++j) acc[j] += rows[j];
      return;
    }
    std::size_t len = static_cast<std::size_t>(side);
    std::copy(rows.begin(), rows.begin() + side, tensor.begin());
    for (int i = 1; i < dim; ++i) {
      const double* r = rows.data() + i * side;
      for (std::size_t o = len; o-- > 0;) {
        const double t = tensor[o];
        for (int j = 0; j < side; ++j) tensor[o * side + j] = t * r[j];
      }
      len *= side;
    }
    for (std::size_t j = 0; j < len; ++j) acc[j] += tensor[j];
  }
};

}  // namespace

namespace serial {

std::vector<double> accumulate_coefficients(const SampleSet& samples, int cutoff) {
  TensorAccumulator t(samples.dim(), cutoff);
  std::vector<double> acc(box_size(samples.dim(), cutoff), 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) t.add(samples.point(i), acc);
  return acc;
}

}  // namespace serial

namespace parallel {

std::vector<double> accumulate_coefficients(const SampleSet& samples, int cutoff) {
  const std::size_t width = box_size(samples.dim(), cutoff);
  const std::size_t n = samples.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks * width, 0.0);
  const auto nc = static_cast<long long>(chunks);
#pragma omp parallel
  {
    TensorAccumulator t(samples.dim(), cutoff);
#pragma omp for schedule(dynamic, 1)
    for (long long c = 0; c < nc; ++c) {
      std::span<double> acc(partial.data() + static_cast<std::size_t>(c) * width, width);
      const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
      const std::size_t end = std::min(n, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) t.add(samples.point(i), acc);
    }
  }
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
}  // namespace advdens::kernels
