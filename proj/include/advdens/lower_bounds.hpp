#pragma once

// Constructions behind the minimax lower bounds: a smooth zero-mean bump,
// the perturbed-uniform hypothesis densities built from it, binary codes
// with large pairwise Hamming distance, and the two-point parametric pair.

#include <cstdint>
#include <span>
#include <vector>

namespace advdens {

/// K(u) = a1 e(u) - a2 e(u)^2 / int e^2 on |u| < 1/2, zero elsewhere, with
/// e(u) = exp(-1 / (1 - 4 u^2)) and a2 = a1 int e, so int K = 0.
struct BumpKernel {
  double a1 = 0.0;
  double a2 = 0.0;
  int order = 0;
  double e_integral = 0.0;    // int e
  double e2_integral = 0.0;   // int e^2
  double k2_integral = 0.0;   // int K^2
  std::vector<double> sup_derivatives;  // sup |K^(j)|, j = 0..order, by central differences

  double operator()(double u) const;
};

/// Chooses a1 so that max_{j <= order} sup |K^(j)| = 1 on a 2^14 grid.
BumpKernel calibrate_bump(int order);

/// Sup-norms of K^(j), j = 0..order, by central differences on a grid of
/// 2^14 cells over [-1/2, 1/2].
std::vector<double> bump_derivative_sups(const BumpKernel& kernel, int order);

/// Fixed-length bit string.
class BitVector {
public:
  explicit BitVector(int length = 0);
  int size() const { return length_; }
  bool operator[](int i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(int i, bool v);
  int count() const;
  bool operator==(const BitVector&) const = default;

  friend int hamming(const BitVector& a, const BitVector& b);

private:
  int length_ = 0;
  std::vector<std::uint64_t> words_;
};

int hamming(const BitVector& a, const BitVector& b);

/// Greedy randomized code in {0,1}^h: starts from the all-zeros word, then
/// keeps random candidates at distance >= ceil(h / 8) from every kept word
/// until floor(2^(h/8)) + 1 words are found. Throws std::runtime_error when
/// the candidate budget runs out.
std::vector<BitVector> vg_code(int h, std::uint64_t seed = 0, std::uint64_t budget = 0);

/// g_w(x) = 1 + sum_xi w_xi h^alpha phi_xi(x) on [0,1]^d with h = 1/m and
/// phi_xi(x) = prod_i K((x_i - (xi_i - 1/2) / m) / h). Bumps are indexed
/// row-major over [m]^d, last coordinate fastest.
class HypothesisDensity {
public:
  HypothesisDensity(BitVector w, int m, int dim, double alpha, BumpKernel kernel);

  double operator()(std::span<const double> x) const;
  int m() const { return m_; }
  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  const BitVector& bits() const { return w_; }
  const BumpKernel& kernel() const { return kernel_; }

  /// Flat index of the bump whose cell contains x, and the bump value phi there.
  std::size_t cell_of(std::span<const double> x, double& phi) const;

private:
  BitVector w_;
  int m_;
  int dim_;
  double alpha_;
  BumpKernel kernel_;
};

/// f_v(x) = sum_xi v_xi h^beta phi_xi(x) with v_xi = +1 where w and w'
/// differ in the direction w_xi = 1, -1 where w'_xi = 1, and +1 elsewhere.
double witness_value(const BitVector& w, const BitVector& w_prime, int m, int dim, double beta,
                     const BumpKernel& kernel, std::span<const double> x);

/// h^(alpha + beta + d) rho(w, w') (int K^2)^d.
double separation(const BitVector& w, const BitVector& w_prime, int m, int dim, double alpha, double beta,
                  const BumpKernel& kernel);

struct KlCloseness {
  double exact = 0.0;          // n KL(g_w | g_0) by quadrature
  double chi2 = 0.0;           // n int (g_0 - g_w)^2 / g_w
  double bound = 0.0;          // 1.01 n h^(2 alpha + d) |w| (int K^2)^d
  double sup_inverse = 0.0;    // sup 1 / g_w
  double weighted_bound = 0.0; // bound with 1.01 replaced by sup_inverse
};

KlCloseness kl_closeness(const BitVector& w, int m, int dim, double alpha, double n, const BumpKernel& kernel);

/// nu0 = 1 on [0,1]^d; nu1 = 3/2 for x_1 < 2/n, 1/2 for 2/n <= x_1 < 4/n, 1 otherwise.
struct LeCamPair {
  int n = 4;
  int dim = 1;

  double nu0(std::span<const double> x) const;
  double nu1(std::span<const double> x) const;
  /// chi^2(nu1 | nu0), summed exactly over the three pieces.
  double chi2() const;
  /// chi^2 of the n-fold products, (1 + chi2)^n - 1.
  double product_chi2() const;
  /// int f (nu0 - nu1) for the witness f = sqrt(n) (nu0 - nu1).
  double witness_gap() const;
};

LeCamPair lecam_pair(int n, int dim);

}  // namespace advdens
