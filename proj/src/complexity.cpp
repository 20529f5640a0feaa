#include "advdens/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace advdens {

namespace {

// log(max(x, 2)) / x, zero at infinity.
double log_rate(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("sample size must be positive");
  return std::isinf(x) ? 0.0 : floored_log(x) / x;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

}  // namespace

void NetworkArch::validate() const {
  if (weights < 1 || units < 1 || depth < 1 || pieces < 1 || degree < 1)
    throw std::invalid_argument("network architecture fields must be positive");
  if (units < depth) throw std::invalid_argument("network needs at least one unit per layer");
}

double floored_log(double x) { return std::log(std::max(x, 2.0)); }

double vc_bound(const NetworkArch& arch, double c) {
  arch.validate();
  require_positive(c, "constant");
  const double L = static_cast<double>(arch.depth);
  const double W = static_cast<double>(arch.weights);
  double v = L * W * floored_log(static_cast<double>(arch.pieces) * static_cast<double>(arch.units));
  if (arch.degree > 1) v += L * L * W * floored_log(static_cast<double>(arch.degree));
  return std::max(1.0, c * v);
}

LeakyArchCounts leaky_arch_counts(int d, int L) {
  if (d < 1 || L < 1) throw std::invalid_argument("leaky_arch_counts needs d, L >= 1");
  const long long dd = d, ll = L;
  LeakyArchCounts out;
  out.f = NetworkArch{2 * (dd * dd * ll + 2 * dd * ll) + 2, 4 * dd * ll, ll + 2, 2, 1};
  out.fg = NetworkArch{out.f.weights + dd * dd * ll, out.f.units + dd * ll, out.f.depth + ll, 2, 1};
  return out;
}

double leaky_pdim_order(int d, int L) {
  if (d < 1 || L < 1) throw std::invalid_argument("leaky_pdim_order needs d, L >= 1");
  const double dl = static_cast<double>(d) * L;
  return dl * dl * floored_log(dl);
}

double covering_bound(double pdim, double m_bound, double n, double eps) {
  require_positive(pdim, "pseudo-dimension");
  require_positive(m_bound, "envelope bound");
  require_positive(n, "sample size");
  require_positive(eps, "epsilon");
  return std::pow(2.0 * std::exp(1.0) * m_bound * n / (eps * pdim), pdim);
}

double rademacher_bound(double pdim, double b, double n, double c) {
  require_positive(pdim, "pseudo-dimension");
  require_positive(n, "sample size");
  if (!(b >= 0.0)) throw std::invalid_argument("envelope bound must be nonnegative");
  return c * b * std::sqrt(pdim * log_rate(n));
}

double stochastic_error(double pdim_f, double pdim_fg, double n, double m) {
  require_positive(pdim_f, "pseudo-dimension");
  require_positive(pdim_fg, "pseudo-dimension");
  const double rm = log_rate(m), rn = log_rate(n);
  return std::max(std::sqrt(pdim_f * std::max(rm, rn)), std::sqrt(pdim_fg * rm));
}

double leaky_rate_bound(int d, int L, double n, double m, double c) {
  return c * std::sqrt(leaky_pdim_order(d, L) * std::max(log_rate(m), log_rate(n)));
}

double gaussian_rate_bound(int d, int p, double n, double m, double c) {
  if (d < 1 || p < 1) throw std::invalid_argument("gaussian_rate_bound needs d, p >= 1");
  const double dd = d, pp = p;
  return c * std::sqrt(dd * dd * floored_log(dd) * (std::isinf(n) ? 0.0 : 1.0 / n) +
                       (pp * dd + dd * dd) * floored_log(pp + dd) * (std::isinf(m) ? 0.0 : 1.0 / m));
}

}  // namespace advdens
