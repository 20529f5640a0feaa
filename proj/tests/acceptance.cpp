// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "advdens/complexity.hpp"
#include "advdens/divergences.hpp"
#include "advdens/estimators.hpp"
#include "advdens/flow.hpp"
#include "advdens/fourier.hpp"
#include "advdens/harness.hpp"
#include "advdens/ipm.hpp"
#include "advdens/lower_bounds.hpp"
#include "oracles.hpp"

using namespace advdens;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<std::uint64_t> pow2_grid(int lo, int hi) {
  std::vector<std::uint64_t> g;
  for (int e = lo; e <= hi; ++e) g.push_back(std::uint64_t{1} << e);
  return g;
}

RateExperiment rate_config(Family family, int d, double alpha, double beta, int replicates, std::uint64_t seed) {
  RateExperiment e;
  e.name = to_string(family);
  e.family = family;
  e.d = d;
  e.alpha = alpha;
  e.beta = beta;
  e.n_grid = pow2_grid(8, 16);
  e.replicates = replicates;
  e.seed = seed;
  return e;
}

std::string csv_of(const RateResult& r) {
  std::ostringstream os;
  write_csv_header(os);
  write_csv(os, r);
  return os.str();
}

Outcome slope_within(const RateExperiment& e, double target, double tol) {
  const RateResult r = run_rate_experiment(e);
  const double s = r.fit.slope;
  return {std::abs(s - target) <= tol,
          fmt("slope %.4f +- %.4f, target %.2f +- %.2f", s, r.fit.stderr_, target, tol)};
}

// 1, 2
Outcome sobolev_slope(double beta, double target) {
  return slope_within(rate_config(Family::sobolev_truncated, 1, 2.0, beta, 20, 1), target, 0.08);
}

// 3
Outcome dominance() {
  const RateExperiment trunc = rate_config(Family::sobolev_truncated, 1, 2.0, 0.0, 50, 3);
  RateExperiment emp = trunc;
  emp.family = Family::sobolev_empirical;
  const RateResult a = run_rate_experiment(trunc);
  const RateResult b = run_rate_experiment(emp);
  int violations = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.mean_error.size(); ++i) {
    violations += a.mean_error[i] > b.mean_error[i];
    worst = std::max(worst, a.mean_error[i] / b.mean_error[i]);
  }
  return {violations == 0, fmt("%d ordering violations over %zu sample sizes, max truncated/empirical ratio %.3f",
                               violations, a.mean_error.size(), worst)};
}

// 4
Outcome simple_oracle() {
  oracle::Fixture fx(4);
  int violations = 0;
  double worst = -INFINITY;
  for (int i = 0; i < 1000; ++i) {
    Philox rng(derive_seed(4, static_cast<std::uint64_t>(i)));
    const int d = 1 + i % 3;
    const int cutoff = d == 1 ? fx.integer(1, 6) : d == 2 ? fx.integer(1, 3) : fx.integer(1, 2);
    const int k = fx.integer(1, 8);
    std::vector<FourierDensity> members;
    for (int j = 0; j < k; ++j) members.push_back(random_fourier_density(d, cutoff, rng, fx.uniform(0.1, 0.9)));
    const GeneratorFamily family(std::move(members));
    const FourierDensity target = random_fourier_density(d, cutoff, rng, fx.uniform(0.1, 0.9));
    const SampleSet x = sample_density(target, static_cast<std::size_t>(fx.integer(20, 400)), rng.next_u64());
    CoefficientMap plugin;
    switch (i % 3) {
      case 0: plugin = estimate_coefficient_map(x, cutoff + fx.integer(0, 2)); break;
      case 1: plugin = truncated_estimator(x, fx.uniform(0.5, 3.0)).coefficients(); break;
      default: plugin = kernel_smoothed_coeffs(x, fx.uniform(0.01, 0.2), cutoff + 1).coefficients(); break;
    }
    const WeightSequence w = WeightSequence::sobolev(fx.uniform(0.0, 2.0));
    const SimpleOracleReport r = check_simple_oracle(family, target.coefficients(), plugin, w);
    violations += !(r.lhs <= r.rhs + 1e-10);
    worst = std::max(worst, r.lhs - r.rhs);
  }
  return {violations == 0, fmt("%d violations in 1000 instances, max lhs - rhs %.3e", violations, worst)};
}

// 5
Outcome generalized_oracle() {
  oracle::Fixture fx(5);
  int violations = 0, nondegenerate = 0;
  double worst = -INFINITY;
  std::size_t binding = 0;
  for (int i = 0; i < 200; ++i) {
    Philox rng(derive_seed(5, static_cast<std::uint64_t>(i)));
    const int d = 1 + i % 3;
    const int depth = 2 + (i / 3) % 2;
    const MlpGenerator target = MlpGenerator::random(d, depth, fx.uniform(0.3, 0.9), rng).centered_kinks();
    std::vector<MlpGenerator> family;
    const int k = fx.integer(2, 4);
    const double scale = fx.uniform(0.05, 0.3);
    for (int j = 0; j < k; ++j) family.push_back(target.perturbed(scale, rng));
    std::vector<MlpGenerator> all = family;
    all.push_back(target);
    const DiscriminatorBank bank = DiscriminatorBank::pairwise(all);
    const std::size_t n = static_cast<std::size_t>(fx.integer(100, 400));
    const std::size_t m = static_cast<std::size_t>(fx.integer(100, 400));
    const GeneralizedOracleReport r = check_generalized_oracle(family, bank, target, n, m, rng.next_u64());
    nondegenerate += r.rhs > 1e-6;
    violations += !(r.lhs <= r.rhs + 3.0 * r.mc_stderr);
    if (r.mc_stderr > 0) worst = std::max(worst, (r.lhs - r.rhs) / r.mc_stderr);
    binding += r.clamp_binding;
  }
  return {violations == 0, fmt("%d violations in 200 instances (%d with a nonzero bound), max (lhs - rhs)/stderr "
                               "%.2f, clamp active %zu times",
                               violations, nondegenerate, worst, binding)};
}

// 6
Outcome flow_exactness() {
  oracle::Fixture fx(6);
  int bad_mass = 0;
  double worst_z = 0.0, worst_roundtrip = 0.0, worst_single = 0.0;
  for (int i = 0; i < 20; ++i) {
    Philox rng(derive_seed(6, static_cast<std::uint64_t>(i)));
    const int d = 1 + i % 3;
    const int depth = 1 + (i / 3) % 4;
    const MlpGenerator g = MlpGenerator::random(d, depth, fx.uniform(0.2, 1.0), rng);
    const MonteCarloEstimate mass = flow_normalization(g, 1000000, rng.next_u64());
    const bool ok = std::abs(mass.value - 1.0) <= 3.0 * mass.stderr_ + 1e-9;
    bad_mass += !ok;
    if (mass.stderr_ > 1e-9) worst_z = std::max(worst_z, std::abs(mass.value - 1.0) / mass.stderr_);
    for (int k = 0; k < 10000; ++k) {
      Vector z(d);
      for (int j = 0; j < d; ++j) z(j) = fx.uniform();
      const auto back = g.inverse(g.forward(z));
      worst_roundtrip = std::max(worst_roundtrip, back ? (*back - z).cwiseAbs().maxCoeff() : INFINITY);
    }
  }
  for (int d = 1; d <= 3; ++d)
    for (int t = 0; t < 20; ++t) {
      Philox rng(derive_seed(66, static_cast<std::uint64_t>(d * 100 + t)));
      const MlpGenerator g = MlpGenerator::random(d, 1, 0.5, rng);
      const double expected = -std::log(std::abs(g.weights()[0].determinant()));
      for (int k = 0; k < 100; ++k) {
        Vector z(d);
        for (int j = 0; j < d; ++j) z(j) = fx.uniform(0.01, 0.99);
        worst_single = std::max(worst_single, std::abs(g.log_density(g.forward(z)) - expected));
      }
    }
  const bool pass = bad_mass == 0 && worst_roundtrip <= 1e-9 && worst_single <= 1e-12;
  return {pass, fmt("normalization misses %d/20 (max |z| %.2f where stderr > 1e-9), roundtrip %.2e, single-layer deviation %.2e",
                    bad_mass, worst_z, worst_roundtrip, worst_single)};
}

// 7
Outcome realizability() {
  oracle::Fixture fx(7);
  double worst = 0.0;
  int short_pairs = 0;
  for (int i = 0; i < 20; ++i) {
    Philox rng(derive_seed(7, static_cast<std::uint64_t>(i)));
    const int d = 1 + i % 3;
    const int depth = 1 + (i / 3) % 4;
    const MlpGenerator g_true = MlpGenerator::random(d, depth, fx.uniform(0.2, 1.0), rng);
    const MlpGenerator g_other = g_true.perturbed(fx.uniform(0.02, 0.1), rng);
    const RealizedDiscriminator f = realize_discriminator(g_true, g_other);
    int used = 0;
    for (int tries = 0; used < 10000 && tries < 1000000; ++tries) {
      Vector z(d);
      for (int j = 0; j < d; ++j) z(j) = fx.uniform(0.001, 0.999);
      const Vector x = g_true.forward(z);
      const double lo = g_other.log_density(x);
      if (lo == kNegativeInfinity) continue;
      ++used;
      worst = std::max(worst, std::abs(f(x) - (g_true.log_density(x) - lo)));
    }
    short_pairs += used < 10000;
  }
  return {worst <= 1e-8 && short_pairs == 0,
          fmt("max |f - log ratio| %.2e over 20 pairs x 10^4 points, %d pairs short of points", worst, short_pairs)};
}

// 8
Outcome gaussian_slope() {
  return slope_within(rate_config(Family::gaussian_gan, 3, 2.0, 0.0, 20, 8), -1.0, 0.1);
}

// 9
Outcome divergence_inequalities() {
  oracle::Fixture fx(9);
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    Philox rng(derive_seed(9, static_cast<std::uint64_t>(i)));
    InequalityReport r;
    switch (i % 4) {
      case 0:
      case 1: {
        const int d = 1 + i % 2;
        const FourierDensity p = random_fourier_density(d, fx.integer(1, 4), rng, fx.uniform(0.2, 0.99));
        const FourierDensity q = random_fourier_density(d, fx.integer(1, 4), rng, fx.uniform(0.2, 0.99));
        r = check_pinsker([&](std::span<const double> x) { return p(x); },
                          [&](std::span<const double> x) { return q(x); }, GridSpec{Box::unit(d), d == 1 ? 1024 : 128});
        break;
      }
      case 2: {
        // one-dimensional flows on a common window
        const MlpGenerator g = MlpGenerator::random(1, 2, 0.5, rng);
        const MlpGenerator h = g.perturbed(0.2, rng);
        const Box bg = g.image_bounds(), bh = h.image_bounds();
        const Box box{{std::min(bg.lower[0], bh.lower[0])}, {std::max(bg.upper[0], bh.upper[0])}};
        auto dens = [](const MlpGenerator& m) {
          return [&m](std::span<const double> x) {
            const double l = m.log_density(Vector(Vector::Constant(1, x[0])));
            return l == kNegativeInfinity ? 0.0 : std::exp(l);
          };
        };
        r = check_pinsker(dens(g), dens(h), GridSpec{box, 4096});
        break;
      }
      default: {
        const int k = fx.integer(2, 50);
        std::vector<double> p(k), q(k);
        double sp = 0, sq = 0;
        for (int j = 0; j < k; ++j) {
          p[j] = std::pow(fx.uniform(), 2);
          q[j] = fx.uniform(0.01, 1.0);
          sp += p[j];
          sq += q[j];
        }
        for (int j = 0; j < k; ++j) p[j] /= sp, q[j] /= sq;
        r = check_pinsker_discrete(p, q);
        break;
      }
    }
    violations += !r.holds();
  }
  return {violations == 0, fmt("%d violations over 100 pairs", violations)};
}

// 10
Outcome lower_bounds() {
  std::vector<std::string> fails;
  const auto code = vg_code(64, 10);
  int dmin = 64;
  for (std::size_t a = 0; a < code.size(); ++a)
    for (std::size_t b = a + 1; b < code.size(); ++b) {
      int dist = 0;
      for (int t = 0; t < 64; ++t) dist += code[a][t] != code[b][t];
      dmin = std::min(dmin, dist);
    }
  if (code.size() < 256 || dmin < 8) fails.push_back("vg");

  const BumpKernel k = calibrate_bump(2);
  double worst_mass = 0.0, min_value = INFINITY;
  for (int d = 1; d <= 2; ++d) {
    const int m = d == 1 ? 8 : 4;
    const int bumps = d == 1 ? 8 : 16;
    for (int c = 0; c < 16; ++c) {
      BitVector w(bumps);
      for (int b = 0; b < bumps; ++b) w.set(b, code[c][b]);
      const HypothesisDensity g(w, m, d, 2.0, k);
      double mass = 0.0;
      if (d == 1) {
        for (int cell = 0; cell < m; ++cell)
          mass += oracle::integrate([&](double x) { return g(std::span<const double>(&x, 1)); },
                                    static_cast<double>(cell) / m, (cell + 1.0) / m, 8);
      } else {
        for (int cx = 0; cx < m; ++cx)
          for (int cy = 0; cy < m; ++cy)
            mass += oracle::integrate(
                [&](double x) {
                  return oracle::integrate(
                      [&](double y) {
                        const double p[2] = {x, y};
                        return g(p);
                      },
                      static_cast<double>(cy) / m, (cy + 1.0) / m, 4);
                },
                static_cast<double>(cx) / m, (cx + 1.0) / m, 4);
      }
      worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
      const GridSpec grid{Box::unit(d), d == 1 ? 4096 : 256};
      std::vector<double> pt(d);
      for (std::size_t f = 0; f < grid.num_points(); ++f) {
        grid.point(f, pt);
        min_value = std::min(min_value, g(pt));
      }
    }
  }
  if (worst_mass > 1e-8) fails.push_back("mass");
  if (min_value < 0.0) fails.push_back("nonnegativity");

  double worst_sep = 0.0;
  for (int c = 1; c < 20; ++c) {
    const int m = 16;
    BitVector w(m), wp(m);
    for (int b = 0; b < m; ++b) {
      w.set(b, code[c][b]);
      wp.set(b, code[c + 1][b + 16]);
    }
    const HypothesisDensity g(w, m, 1, 2.0, k), gp(wp, m, 1, 2.0, k);
    double direct = 0.0;
    for (int cell = 0; cell < m; ++cell)
      direct += oracle::integrate(
          [&](double x) {
            const std::span<const double> s(&x, 1);
            return witness_value(w, wp, m, 1, 1.0, k, s) * (g(s) - gp(s));
          },
          static_cast<double>(cell) / m, (cell + 1.0) / m, 16);
    const double formula = separation(w, wp, m, 1, 2.0, 1.0, k);
    if (formula > 0) worst_sep = std::max(worst_sep, std::abs(direct - formula) / formula);
    else worst_sep = std::max(worst_sep, std::abs(direct));
  }
  if (worst_sep > 1e-6) fails.push_back("separation");

  bool lecam_ok = true;
  for (int n : {4, 8, 64, 1000, 65536}) {
    const LeCamPair p = lecam_pair(n, 1);
    lecam_ok = lecam_ok && p.chi2() == 1.0 / n;
  }
  if (!lecam_ok) fails.push_back("le_cam");

  std::string which;
  for (const auto& f : fails) which += " " + f;
  return {fails.empty(), fmt("%zu codewords, min distance %d; mass error %.2e, min value %.3f; separation rel. error "
                             "%.2e; chi2 = 1/n %s%s%s",
                             code.size(), dmin, worst_mass, min_value, worst_sep, lecam_ok ? "exact" : "off",
                             fails.empty() ? "" : "; failed:", which.c_str())};
}

// 11
Outcome complexity() {
  bool counts_ok = true;
  double c_fit = 0.0;
  for (int d : {1, 2, 4})
    for (int L : {1, 3, 8}) {
      const LeakyArchCounts c = leaky_arch_counts(d, L);
      const long long dd = d, ll = L;
      counts_ok = counts_ok && c.f.weights == 2 * (dd * dd * ll + 2 * dd * ll) + 2 && c.f.units == 4 * dd * ll &&
                  c.f.depth == ll + 2 && c.fg.weights == c.f.weights + dd * dd * ll &&
                  c.fg.units == c.f.units + dd * ll && c.fg.depth == c.f.depth + ll;
      c_fit = std::max(c_fit, vc_bound(c.f) / leaky_pdim_order(d, L));
    }
  // the constant fitted on the grid must also cover a wider range
  double wider = 0.0;
  for (int d = 1; d <= 64; d *= 2)
    for (int L = 1; L <= 64; ++L) wider = std::max(wider, vc_bound(leaky_arch_counts(d, L).f) / leaky_pdim_order(d, L));
  return {counts_ok && wider <= c_fit * (1 + 1e-12),
          fmt("counts %s, ratio constant %.3f on the grid, %.3f up to d, L = 64", counts_ok ? "exact" : "wrong", c_fit,
              wider)};
}

// 12
Outcome determinism() {
  std::vector<RateExperiment> exps{rate_config(Family::sobolev_truncated, 1, 2.0, 0.0, 10, 12),
                                   rate_config(Family::kernel_smoothed, 2, 1.0, 0.5, 10, 12),
                                   rate_config(Family::gaussian_gan, 3, 2.0, 0.0, 10, 12)};
  RateExperiment flow = rate_config(Family::flow_gan, 1, 2.0, 0.0, 10, 12);
  flow.n_grid = pow2_grid(6, 9);
  exps.push_back(flow);
  int mismatches = 0;
  const int threads = omp_get_max_threads();
  for (auto& e : exps) {
    e.n_grid.resize(std::min<std::size_t>(e.n_grid.size(), 5));
    omp_set_num_threads(1);
    const std::string a = csv_of(run_rate_experiment(e));
    omp_set_num_threads(4);
    const std::string b = csv_of(run_rate_experiment(e));
    omp_set_num_threads(threads);
    const std::string c = csv_of(run_rate_experiment(e));
    mismatches += a != b || a != c;
  }
  return {mismatches == 0, fmt("%d of %zu experiments differ across reruns with 1, 4 and %d threads", mismatches,
                               exps.size(), threads)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"sobolev rate slope, beta = 0", [] { return sobolev_slope(0.0, -0.4); }},
      {"sobolev rate slope, beta = 1", [] { return sobolev_slope(1.0, -0.5); }},
      {"truncation dominates the empirical plug-in", dominance},
      {"simple oracle inequality", simple_oracle},
      {"generalized oracle inequality", generalized_oracle},
      {"flow density exactness", flow_exactness},
      {"realizability of log-density ratios", realizability},
      {"gaussian GAN rate slope", gaussian_slope},
      {"divergence inequalities", divergence_inequalities},
      {"lower-bound constructions", lower_bounds},
      {"complexity calculators", complexity},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
