#pragma once

// Divergences between densities by midpoint quadrature or Monte Carlo, and
// the standard inequality chain relating them.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "advdens/kernels.hpp"
#include "advdens/rng.hpp"

namespace advdens {

using DensityFn = std::function<double(std::span<const double>)>;
using LogDensityFn = std::function<double(std::span<const double>)>;
/// Writes one draw into `out`.
using SamplerFn = std::function<void(Philox&, std::span<double>)>;

/// Quadrature value at `resolution` and 2x`resolution`; `value` is the finer
/// one and `error` the absolute difference between the two.
struct GridEstimate {
  double value = 0.0;
  double error = 0.0;
};

struct KlEstimate {
  double value = 0.0;
  double error = 0.0;     // two-resolution difference, or MC standard error
  bool infinite = false;  // q vanished somewhere p did not
};

/// All divergences of one grid pass.
struct DivergenceSet {
  double mass_p = 0.0;
  double mass_q = 0.0;
  double tv = 0.0;
  double hellinger = 0.0;  // (int (sqrt p - sqrt q)^2)^(1/2)
  double kl_pq = 0.0;
  double kl_qp = 0.0;
  double js = 0.0;
  bool kl_pq_infinite = false;
  bool kl_qp_infinite = false;
};

/// Divergences of the grid-evaluated densities. With `normalize`, each
/// density is replaced by its normalized cell masses, so the values are
/// exact divergences between two discrete distributions.
DivergenceSet grid_divergences(const DensityFn& p, const DensityFn& q, const GridSpec& grid, bool normalize = false);

namespace kernels::serial {
DivergenceSet grid_divergences(const DensityFn& p, const DensityFn& q, const GridSpec& grid, bool normalize);
}

/// 1/2 int |p - q|, clamped to [0, 1].
GridEstimate tv_grid(const DensityFn& p, const DensityFn& q, const GridSpec& grid);
/// (int (sqrt p - sqrt q)^2)^(1/2), clamped to [0, sqrt 2].
GridEstimate hellinger_grid(const DensityFn& p, const DensityFn& q, const GridSpec& grid);
KlEstimate kl_grid(const DensityFn& p, const DensityFn& q, const GridSpec& grid);
/// 1/2 KL(p | m) + 1/2 KL(q | m), m = (p + q) / 2, clamped to [0, log 2].
GridEstimate js_from_kl(const DensityFn& p, const DensityFn& q, const GridSpec& grid);

/// Monte-Carlo E_p[log p - log q] from n_mc draws of `sample_p`.
KlEstimate kl_mc(const LogDensityFn& log_p, const LogDensityFn& log_q, const SamplerFn& sample_p, int dim,
                 std::size_t n_mc, std::uint64_t seed);

/// W1 between two empirical measures on the line: the L1 distance between
/// their quantile functions. Sizes may differ.
double wasserstein1_1d(std::vector<double> a, std::vector<double> b);

struct InequalityReport {
  DivergenceSet values;
  DivergenceSet coarse;
  double tolerance = 0.0;
  bool pinsker = false;          // 2 TV^2 <= KL(p|q)
  bool le_cam = false;           // TV^2 <= H^2
  bool symmetrized = false;      // 4 TV^2 <= KL(p|q) + KL(q|p)
  bool tv_hellinger = false;     // TV <= H
  bool holds() const { return pinsker && le_cam && symmetrized && tv_hellinger; }
};

/// Checks the inequality chain on the normalized grid discretizations of p
/// and q, with tolerance 3 x the two-resolution difference.
InequalityReport check_pinsker(const DensityFn& p, const DensityFn& q, const GridSpec& grid);

/// Inequality chain for two probability vectors.
InequalityReport check_pinsker_discrete(std::span<const double> p, std::span<const double> q);

}  // namespace advdens
