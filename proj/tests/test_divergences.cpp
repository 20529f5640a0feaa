#include <cmath>
#include <numbers>

#include "advdens/divergences.hpp"
#include "advdens/fourier.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace advdens;

namespace {

double p1(double) { return 1.0; }
double q1(double x) { return 2.0 / 3.0 * (1.0 + x); }

DensityFn wrap(double (*f)(double)) {
  return [f](std::span<const double> x) { return f(x[0]); };
}

GridSpec unit_grid(int dim, int res) { return GridSpec{Box::unit(dim), res}; }

}  // namespace

TEST_CASE("grid divergences match quadrature oracles") {
  const double tv = 0.5 * oracle::integrate([](double x) { return std::abs(p1(x) - q1(x)); }, 0, 0.5) +
                    0.5 * oracle::integrate([](double x) { return std::abs(p1(x) - q1(x)); }, 0.5, 1);
  const double h2 = oracle::integrate([](double x) { return std::pow(std::sqrt(p1(x)) - std::sqrt(q1(x)), 2); }, 0, 1);
  const double kl_pq = oracle::integrate([](double x) { return p1(x) * std::log(p1(x) / q1(x)); }, 0, 1);
  const double kl_qp = oracle::integrate([](double x) { return q1(x) * std::log(q1(x) / p1(x)); }, 0, 1);
  const double js = oracle::integrate(
      [](double x) {
        const double m = 0.5 * (p1(x) + q1(x));
        return 0.5 * p1(x) * std::log(p1(x) / m) + 0.5 * q1(x) * std::log(q1(x) / m);
      },
      0, 1);

  const DivergenceSet s = grid_divergences(wrap(p1), wrap(q1), unit_grid(1, 4096));
  CHECK(s.mass_p == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.mass_q == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.tv == doctest::Approx(tv).epsilon(1e-6));
  CHECK(s.hellinger == doctest::Approx(std::sqrt(h2)).epsilon(1e-6));
  CHECK(s.kl_pq == doctest::Approx(kl_pq).epsilon(1e-6));
  CHECK(s.kl_qp == doctest::Approx(kl_qp).epsilon(1e-6));
  CHECK(s.js == doctest::Approx(js).epsilon(1e-6));
  CHECK_FALSE(s.kl_pq_infinite);

  CHECK(tv_grid(wrap(p1), wrap(q1), unit_grid(1, 512)).value == doctest::Approx(tv).epsilon(1e-5));
  CHECK(hellinger_grid(wrap(p1), wrap(q1), unit_grid(1, 512)).value == doctest::Approx(std::sqrt(h2)).epsilon(1e-5));
  const KlEstimate k = kl_grid(wrap(p1), wrap(q1), unit_grid(1, 512));
  CHECK(k.value == doctest::Approx(kl_pq).epsilon(1e-5));
  CHECK(k.error < 1e-5);
  CHECK(js_from_kl(wrap(p1), wrap(q1), unit_grid(1, 512)).value == doctest::Approx(js).epsilon(1e-5));
}

TEST_CASE("closed-form values") {
  // p = 1, q = 2x on [0,1]
  auto q = [](std::span<const double> x) { return 2.0 * x[0]; };
  auto p = [](std::span<const double>) { return 1.0; };
  const GridEstimate t = tv_grid(p, q, unit_grid(1, 1024));
  CHECK(t.value == doctest::Approx(0.25).epsilon(1e-6));
  const GridEstimate h = hellinger_grid(p, q, unit_grid(1, 1024));
  CHECK(h.value * h.value == doctest::Approx(2.0 - 4.0 * std::sqrt(2.0) / 3.0).epsilon(1e-5));
  CHECK(kl_grid(q, p, unit_grid(1, 1024)).value == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-5));
}

TEST_CASE("parallel and serial grid passes agree") {
  Philox rng(3);
  const FourierDensity f = random_fourier_density(2, 3, rng), g = random_fourier_density(2, 3, rng);
  auto p = [&](std::span<const double> x) { return f(x); };
  auto q = [&](std::span<const double> x) { return g(x); };
  for (bool norm : {false, true}) {
    const DivergenceSet a = grid_divergences(p, q, unit_grid(2, 200), norm);
    const DivergenceSet b = kernels::serial::grid_divergences(p, q, unit_grid(2, 200), norm);
    CHECK(a.tv == doctest::Approx(b.tv).epsilon(1e-12));
    CHECK(a.kl_pq == doctest::Approx(b.kl_pq).epsilon(1e-12));
    CHECK(a.js == doctest::Approx(b.js).epsilon(1e-12));
    CHECK(a.hellinger == doctest::Approx(b.hellinger).epsilon(1e-12));
  }
}

TEST_CASE("infinite KL and domain errors") {
  auto p = [](std::span<const double>) { return 1.0; };
  auto q = [](std::span<const double> x) { return x[0] < 0.5 ? 2.0 : 0.0; };
  const DivergenceSet s = grid_divergences(p, q, unit_grid(1, 64));
  CHECK(s.kl_pq_infinite);
  CHECK_FALSE(s.kl_qp_infinite);
  CHECK(s.kl_qp == doctest::Approx(std::log(2.0)));
  CHECK(kl_grid(p, q, unit_grid(1, 64)).infinite);
  CHECK(s.tv == doctest::Approx(0.5));
  CHECK(s.js <= std::log(2.0));
  auto bad = [](std::span<const double> x) { return x[0] - 0.5; };
  CHECK_THROWS_AS(grid_divergences(p, bad, unit_grid(1, 16)), std::domain_error);
}

TEST_CASE("Monte-Carlo KL between Gaussians") {
  // KL(N(0,1) | N(1,1)) = 1/2
  auto log_p = [](std::span<const double> x) { return -0.5 * x[0] * x[0]; };
  auto log_q = [](std::span<const double> x) { return -0.5 * (x[0] - 1) * (x[0] - 1); };
  auto sample = [](Philox& rng, std::span<double> out) { out[0] = rng.normal(); };
  const KlEstimate k = kl_mc(log_p, log_q, sample, 1, 200000, 5);
  CHECK(std::abs(k.value - 0.5) <= 4 * k.error);
  CHECK(k.error > 0.0);
  const KlEstimate k2 = kl_mc(log_p, log_q, sample, 1, 200000, 5);
  CHECK(k2.value == k.value);
}

TEST_CASE("one-dimensional Wasserstein") {
  CHECK(wasserstein1_1d({0.0}, {0.0, 1.0}) == doctest::Approx(0.5));
  CHECK(wasserstein1_1d({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  oracle::Fixture fx(4);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> a(30), b(30);
    for (auto& v : a) v = fx.normal();
    for (auto& v : b) v = fx.normal() + 0.3;
    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    double expected = 0.0;
    for (int i = 0; i < 30; ++i) expected += std::abs(sa[i] - sb[i]);
    CHECK(wasserstein1_1d(a, b) == doctest::Approx(expected / 30).epsilon(1e-12));
    // duplicating one sample set leaves the measure unchanged
    std::vector<double> aa = a;
    aa.insert(aa.end(), a.begin(), a.end());
    CHECK(wasserstein1_1d(aa, b) == doctest::Approx(expected / 30).epsilon(1e-12));
    // shift
    std::vector<double> shifted = a;
    for (auto& v : shifted) v += 2.0;
    CHECK(wasserstein1_1d(a, shifted) == doctest::Approx(2.0));
  }
}

TEST_CASE("inequality chain on random discrete distributions") {
  oracle::Fixture fx(6);
  for (int t = 0; t < 500; ++t) {
    const int k = fx.integer(2, 20);
    std::vector<double> p(k), q(k);
    double sp = 0, sq = 0;
    for (int i = 0; i < k; ++i) {
      p[i] = fx.uniform(0.0, 1.0);
      q[i] = std::pow(fx.uniform(0.0, 1.0), 3);
      sp += p[i];
      sq += q[i];
    }
    for (int i = 0; i < k; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    const InequalityReport r = check_pinsker_discrete(p, q);
    CHECK(r.holds());
    // direct oracle values
    double tv = 0, kl = 0;
    for (int i = 0; i < k; ++i) {
      tv += 0.5 * std::abs(p[i] - q[i]);
      kl += p[i] * std::log(p[i] / q[i]);
    }
    CHECK(r.values.tv == doctest::Approx(tv).epsilon(1e-12));
    CHECK(r.values.kl_pq == doctest::Approx(kl).epsilon(1e-10));
  }
}

TEST_CASE("inequality chain on densities") {
  Philox rng(8);
  for (int t = 0; t < 10; ++t) {
    const FourierDensity f = random_fourier_density(2, 2, rng), g = random_fourier_density(2, 2, rng);
    const InequalityReport r = check_pinsker(
        [&](std::span<const double> x) { return f(x); }, [&](std::span<const double> x) { return g(x); },
        unit_grid(2, 128));
    CHECK(r.holds());
    CHECK(r.tolerance >= 1e-12);
  }
}
