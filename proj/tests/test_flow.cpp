#include <cmath>
#include <sstream>

#include "advdens/flow.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace advdens;

namespace {

// Smallest |pre-activation| over the hidden layers at z, computed directly.
double kink_distance(const MlpGenerator& g, const Vector& z) {
  Vector h = z;
  double d = INFINITY;
  for (int l = 0; l < g.depth(); ++l) {
    Vector pre = g.weights()[l] * h + g.biases()[l];
    if (l + 1 == g.depth()) break;
    d = std::min(d, pre.cwiseAbs().minCoeff());
    for (int i = 0; i < pre.size(); ++i) pre(i) = pre(i) > 0 ? pre(i) : g.leak() * pre(i);
    h = pre;
  }
  return d;
}

// log density by change of variables with a finite-difference Jacobian.
double finite_difference_log_density(const MlpGenerator& g, const Vector& z) {
  const int d = g.dim();
  const double h = 1e-6;
  Matrix jac(d, d);
  for (int i = 0; i < d; ++i) {
    Vector zp = z, zm = z;
    zp(i) += h;
    zm(i) -= h;
    jac.col(i) = (g.forward(zp) - g.forward(zm)) / (2 * h);
  }
  return -std::log(std::abs(jac.determinant()));
}

Vector random_interior(oracle::Fixture& fx, int d) {
  Vector z(d);
  for (int i = 0; i < d; ++i) z(i) = fx.uniform(0.01, 0.99);
  return z;
}

}  // namespace

TEST_CASE("leaky relu and its inverse") {
  for (double a : {0.1, 0.5, 1.0})
    for (double t : {-3.0, -0.2, 0.0, 0.7, 5.0}) CHECK(leaky_relu_inverse(leaky_relu(t, a), a) == doctest::Approx(t));
  CHECK(leaky_relu(-2.0, 0.25) == -0.5);
  CHECK(leaky_relu_inverse(-0.5, 0.25) == -2.0);
}

TEST_CASE("identity generator") {
  const MlpGenerator g = MlpGenerator::identity(2, 3);
  Vector z(2);
  z << 0.3, 0.8;
  CHECK((g.forward(z) - z).norm() == 0.0);
  CHECK(g.log_density(z) == 0.0);
  Vector out(2);
  out << 1.2, 0.5;
  CHECK(g.log_density(out) == kNegativeInfinity);
  CHECK_FALSE(g.inverse(out).has_value());
}

TEST_CASE("forward matches a direct layer recursion") {
  Philox rng(1);
  const MlpGenerator g = MlpGenerator::random(3, 3, 0.4, rng);
  oracle::Fixture fx(1);
  for (int t = 0; t < 20; ++t) {
    const Vector z = random_interior(fx, 3);
    Vector h = z;
    for (int l = 0; l < 3; ++l) {
      h = g.weights()[l] * h + g.biases()[l];
      if (l < 2)
        for (int i = 0; i < 3; ++i) h(i) = std::max(h(i), 0.4 * h(i));
    }
    CHECK((g.forward(z) - h).norm() <= 1e-14 * (1 + h.norm()));
  }
  PointMatrix batch(3, 5);
  for (int j = 0; j < 5; ++j) batch.col(j) = random_interior(fx, 3);
  const PointMatrix out = g.forward(batch);
  for (int j = 0; j < 5; ++j) CHECK((out.col(j) - g.forward(Vector(batch.col(j)))).norm() <= 1e-14);
}

TEST_CASE("inverse roundtrip") {
  oracle::Fixture fx(2);
  for (int t = 0; t < 20; ++t) {
    Philox rng(100 + t);
    const int d = fx.integer(1, 4), depth = fx.integer(1, 4);
    const MlpGenerator g = MlpGenerator::random(d, depth, fx.uniform(0.2, 1.0), rng);
    for (int k = 0; k < 50; ++k) {
      const Vector z = random_interior(fx, d);
      const Vector x = g.forward(z);
      const auto back = g.inverse(x);
      REQUIRE(back.has_value());
      CHECK((*back - z).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("log density matches change of variables") {
  oracle::Fixture fx(3);
  int compared = 0;
  for (int t = 0; t < 10; ++t) {
    Philox rng(200 + t);
    const int d = fx.integer(1, 3), depth = fx.integer(1, 3);
    const MlpGenerator g = MlpGenerator::random(d, depth, 0.5, rng);
    for (int k = 0; k < 30; ++k) {
      const Vector z = random_interior(fx, d);
      if (kink_distance(g, z) < 1e-3) continue;
      ++compared;
      CHECK(g.log_density(g.forward(z)) == doctest::Approx(finite_difference_log_density(g, z)).epsilon(1e-6));
    }
  }
  CHECK(compared > 200);
}

TEST_CASE("one-dimensional flows integrate to one") {
  for (int t = 0; t < 5; ++t) {
    Philox rng(300 + t);
    const MlpGenerator g = MlpGenerator::random(1, 2, 0.5, rng);
    const Box box = g.image_bounds();
    // image of [0,1] is an interval; split the quadrature at the image of each kink
    std::vector<double> cuts{box.lower[0], box.upper[0]};
    const double w1 = g.weights()[0](0, 0), b1 = g.biases()[0](0);
    const double zk = -b1 / w1;
    if (zk > 0 && zk < 1) cuts.push_back(g.forward(Vector(Vector::Constant(1, zk)))(0));
    std::sort(cuts.begin(), cuts.end());
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      mass += oracle::integrate([&](double x) { return std::exp(g.log_density(Vector::Constant(1, x))); },
                                cuts[i], cuts[i + 1], 64);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("Monte-Carlo normalization") {
  for (int t = 0; t < 4; ++t) {
    Philox rng(400 + t);
    const MlpGenerator g = MlpGenerator::random(2, 2, 0.5, rng);
    const MonteCarloEstimate e = flow_normalization(g, 200000, 7 + t);
    CHECK(e.stderr_ > 0.0);
    CHECK(std::abs(e.value - 1.0) <= 4 * e.stderr_);
  }
}

TEST_CASE("image bounds contain the image") {
  oracle::Fixture fx(5);
  Philox rng(5);
  const MlpGenerator g = MlpGenerator::random(3, 3, 0.3, rng);
  const Box b = g.image_bounds();
  for (int k = 0; k < 1000; ++k) {
    const Vector x = g.forward(random_interior(fx, 3));
    for (int i = 0; i < 3; ++i) {
      CHECK(x(i) >= b.lower[i]);
      CHECK(x(i) <= b.upper[i]);
    }
  }
}

TEST_CASE("realized discriminator equals the log-density ratio") {
  oracle::Fixture fx(6);
  for (int t = 0; t < 10; ++t) {
    Philox rng(600 + t);
    const int d = fx.integer(1, 3), depth = fx.integer(1, 3);
    const double a = fx.uniform(0.3, 0.9);
    const MlpGenerator g1 = MlpGenerator::random(d, depth, a, rng);
    const MlpGenerator g2 = g1.perturbed(0.1, rng);
    const RealizedDiscriminator f = realize_discriminator(g1, g2);
    int common = 0;
    for (int k = 0; k < 500; ++k) {
      const Vector x = g1.forward(random_interior(fx, d));
      const double l2 = g2.log_density(x);
      if (l2 == kNegativeInfinity) continue;
      ++common;
      CHECK(std::abs(f(x) - (g1.log_density(x) - l2)) <= 1e-8);
      CHECK(f.negated()(x) == doctest::Approx(-f(x)));
    }
    CHECK(common > 0);
  }
  Philox rng(1);
  CHECK_THROWS(realize_discriminator(MlpGenerator::random(2, 2, 0.5, rng), MlpGenerator::random(2, 3, 0.5, rng)));
}

TEST_CASE("half network evaluates without a support check") {
  Philox rng(7);
  const MlpGenerator g = MlpGenerator::random(2, 2, 0.5, rng);
  const HalfNetwork h = HalfNetwork::from_generator(g);
  Vector x(2);
  x << 50.0, -40.0;
  const auto pb = g.pullback(x);
  CHECK(h(x) == doctest::Approx(-g.log_abs_det_sum() + std::log(2.0) * pb.nonpositive));
  CHECK(h(x.data()) == h(x));
}

TEST_CASE("discriminator bank") {
  Philox rng(8);
  std::vector<MlpGenerator> gens;
  for (int i = 0; i < 3; ++i) gens.push_back(MlpGenerator::random(2, 2, 0.5, rng));
  const DiscriminatorBank bank = DiscriminatorBank::pairwise(gens);
  CHECK(bank.size() == 6);
  CHECK(bank.halves.size() == 3);
  CHECK(bank.symmetric());
  CHECK(DiscriminatorBank::pairwise({gens[0]}).size() == 1);

  PointMatrix pts = uniform_latent(2, 3000, rng);
  pts = gens[0].forward(pts);
  const double clamp = default_clamp(gens);
  const BankMoments s = kernels::serial::bank_moments(bank, pts, clamp);
  const BankMoments p = kernels::parallel::bank_moments(bank, pts, clamp);
  REQUIRE(s.mean.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(s.mean[k] == doctest::Approx(p.mean[k]).epsilon(1e-12));
    CHECK(s.variance[k] == doctest::Approx(p.variance[k]).epsilon(1e-10));
    // direct average
    const auto [i, j] = bank.members[k];
    double direct = 0.0;
    for (int c = 0; c < pts.cols(); ++c) {
      const Vector x = pts.col(c);
      direct += std::clamp(bank.halves[i](x) - bank.halves[j](x), -clamp, clamp);
    }
    CHECK(s.mean[k] == doctest::Approx(direct / pts.cols()).epsilon(1e-12));
  }
  CHECK(s.clamp_binding == 0);
  CHECK(p.count == 3000);
}

TEST_CASE("enumerated GAN recovers the target among candidates") {
  Philox rng(9);
  const MlpGenerator target = MlpGenerator::random(1, 2, 0.5, rng);
  std::vector<MlpGenerator> gens{target.perturbed(0.4, rng), target, target.perturbed(0.4, rng)};
  const DiscriminatorBank bank = DiscriminatorBank::pairwise(gens);
  const PointMatrix data = target.forward(uniform_latent(1, 20000, rng));
  const PointMatrix latent = uniform_latent(1, 20000, rng);
  const GanResult r = enumerated_gan(gens, bank, data, latent, default_clamp(gens));
  CHECK(r.chosen == 1);
  CHECK(r.values.size() == 3);
  for (double v : r.values) CHECK(v >= 0.0);  // bank is closed under negation

  std::vector<RealizedDiscriminator> fam;
  for (const auto& [i, j] : bank.members) fam.emplace_back(bank.halves[i], bank.halves[j]);
  const GanResult r2 = enumerated_gan(gens, fam, data, latent, default_clamp(gens));
  CHECK(r2.chosen == r.chosen);
  for (int k = 0; k < 3; ++k) CHECK(r2.values[k] == doctest::Approx(r.values[k]).epsilon(1e-12));
}

TEST_CASE("generalized oracle inequality on small instances") {
  for (int t = 0; t < 3; ++t) {
    Philox rng(1000 + t);
    const MlpGenerator target = MlpGenerator::random(2, 2, 0.5, rng);
    std::vector<MlpGenerator> gens;
    for (int i = 0; i < 3; ++i) gens.push_back(target.perturbed(0.15, rng));
    const DiscriminatorBank bank = DiscriminatorBank::pairwise(gens);
    const GeneralizedOracleReport r = check_generalized_oracle(gens, bank, target, 200, 200, 17 + t, {100000, {}});
    CHECK(r.holds);
    CHECK(r.lhs <= r.rhs + 1e-9);
    CHECK(r.data_term >= 0.0);
    CHECK(r.generator_term >= 0.0);
    CHECK(r.latent_term >= 0.0);
    CHECK(r.rhs == doctest::Approx(r.approximation + 2 * r.data_term + r.generator_term + r.latent_term));
  }
}

TEST_CASE("gaussian GAN fit") {
  Philox rng(11);
  Vector mean(2);
  mean << 0.5, -1.0;
  Matrix a(2, 2);
  a << 1.0, 0.0, 0.4, 0.7;
  const GaussianModel truth(mean, a);
  const PointMatrix data = truth.sample(5000, rng);
  const GaussianModel fit = gaussian_gan_fit(data, 3);
  CHECK(fit.factor().cols() == 3);
  CHECK(fit.factor().col(2).norm() == 0.0);
  const Vector mu = data.rowwise().mean();
  const Matrix centered = data.colwise() - mu;
  const Matrix cov = centered * centered.transpose() / data.cols();
  CHECK((fit.mean() - mu).norm() <= 1e-12);
  CHECK((fit.covariance() - cov).norm() <= 1e-10);
  CHECK(quadratic_moment_gap(fit, data) <= 1e-9);
  CHECK(gaussian_kl(truth, fit) < 0.01);
  CHECK_THROWS(gaussian_gan_fit(data, 1));
  PointMatrix flat(2, 10);
  flat.setZero();
  CHECK_THROWS_AS(gaussian_gan_fit(flat, 2), std::domain_error);
}

TEST_CASE("gaussian KL closed form") {
  Vector m0(1), m1(1);
  m0 << 0.0;
  m1 << 1.0;
  Matrix s0(1, 1), s1(1, 1);
  s0 << 1.0;
  s1 << 2.0;
  // KL(N(0,1) || N(1,4)) = log 2 + (1 + 1) / 8 - 1/2
  CHECK(gaussian_kl(GaussianModel(m0, s0), GaussianModel(m1, s1)) ==
        doctest::Approx(std::log(2.0) + 2.0 / 8 - 0.5));
  CHECK(gaussian_kl(GaussianModel(m0, s0), GaussianModel(m0, s0)) == doctest::Approx(0.0));
  const GaussianModel g(m0, s1);
  CHECK(g.log_density(m0) == doctest::Approx(-0.5 * std::log(2 * M_PI * 4)));
}

TEST_CASE("serialization roundtrip") {
  Philox rng(12);
  const MlpGenerator g = MlpGenerator::random(3, 2, 0.3, rng);
  std::stringstream ss;
  write_generator(ss, g);
  const MlpGenerator back = read_generator(ss);
  CHECK(back.leak() == g.leak());
  for (int l = 0; l < 2; ++l) {
    CHECK(back.weights()[l] == g.weights()[l]);
    CHECK(back.biases()[l] == g.biases()[l]);
  }
  const RealizedDiscriminator f = realize_discriminator(g, g.perturbed(0.1, rng));
  std::stringstream s2;
  write_discriminator(s2, f);
  const RealizedDiscriminator f2 = read_discriminator(s2);
  Vector x = g.forward(Vector(Vector::Constant(3, 0.5)));
  CHECK(f2(x) == f(x));
  std::stringstream bad("2 1 0.5\n1 0\n");
  CHECK_THROWS(read_generator(bad));
}
