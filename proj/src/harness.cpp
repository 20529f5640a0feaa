#include "advdens/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "advdens/divergences.hpp"
#include "advdens/estimators.hpp"
#include "advdens/flow.hpp"
#include "advdens/fourier.hpp"
#include "advdens/ipm.hpp"
#include "advdens/lower_bounds.hpp"
#include "advdens/rng.hpp"
#include "json.hpp"

namespace advdens {

namespace {

const std::map<std::string, Family>& family_table() {
  static const std::map<std::string, Family> table{
      {"sobolev_truncated", Family::sobolev_truncated}, {"sobolev_empirical", Family::sobolev_empirical},
      {"kernel_smoothed", Family::kernel_smoothed},     {"gaussian_gan", Family::gaussian_gan},
      {"flow_gan", Family::flow_gan}};
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(Family f) {
  for (const auto& [name, v] : family_table())
    if (v == f) return name;
  return "unknown";
}

Family parse_family(const std::string& s) {
  const auto it = family_table().find(s);
  if (it == family_table().end()) throw ConfigError("unknown family '" + s + "'");
  return it->second;
}

void RateExperiment::validate() const {
  const std::string where = name.empty() ? "experiment" : "[" + name + "]";
  auto fail = [&](const std::string& msg) { throw ConfigError(where + ": " + msg); };
  if (d < 1 || d > 3) fail("d must lie in [1, 3]");
  if (!(alpha > 0.0)) fail("alpha must be positive");
  if (!(beta >= 0.0)) fail("beta must be nonnegative");
  if (replicates < kMinReplicates) fail("replicates must be at least " + std::to_string(kMinReplicates));
  if (n_grid.size() < 2) fail("n_grid needs at least two sample sizes");
  if (n_grid.front() < 2) fail("sample sizes must be at least 2");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1]) fail("n_grid must be strictly increasing");
  if (p != 0 && p < d) fail("p must be at least d");
  if (depth < 1) fail("depth must be at least 1");
  if (!(leak > 0.0 && leak <= 1.0)) fail("leak must lie in (0, 1]");
  if (candidates < 2) fail("candidates must be at least 2");
  if (eval_cutoff && *eval_cutoff < 1) fail("eval_cutoff must be at least 1");
}

// --- config -------------------------------------------------------------------

namespace {

std::uint64_t parse_count(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  if (t.size() > 2 && t.rfind("2^", 0) == 0) {
    const auto e = parse_count(t.substr(2), key);
    if (e > 62) throw ConfigError(key + ": exponent too large");
    return std::uint64_t{1} << e;
  }
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw ConfigError(key + ": expected a nonnegative integer, got '" + t + "'");
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range '" + t + "'");
  }
}

std::vector<std::uint64_t> parse_grid(const std::string& v) {
  std::vector<std::uint64_t> out;
  const auto dots = v.find("..");
  if (dots != std::string::npos) {
    const std::string a = trim(v.substr(0, dots)), b = trim(v.substr(dots + 2));
    if (a.rfind("2^", 0) != 0 || b.rfind("2^", 0) != 0) throw ConfigError("n_grid: ranges must be 2^a..2^b");
    const auto lo = parse_count(a.substr(2), "n_grid"), hi = parse_count(b.substr(2), "n_grid");
    if (hi > 62 || lo > hi) throw ConfigError("n_grid: invalid range");
    for (auto e = lo; e <= hi; ++e) out.push_back(std::uint64_t{1} << e);
    return out;
  }
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count(item, "n_grid"));
  return out;
}

double parse_real(const std::string& v, const std::string& key) {
  try {
    return parse_double(trim(v));
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + trim(v) + "'");
  }
}

int parse_int(const std::string& v, const std::string& key) {
  const auto u = parse_count(v, key);
  if (u > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) throw ConfigError(key + ": too large");
  return static_cast<int>(u);
}

void apply(RateExperiment& e, const std::string& key, const std::string& value) {
  if (key == "family") e.family = parse_family(value);
  else if (key == "d") e.d = parse_int(value, key);
  else if (key == "alpha") e.alpha = parse_real(value, key);
  else if (key == "beta") e.beta = parse_real(value, key);
  else if (key == "p") e.p = parse_int(value, key);
  else if (key == "depth") e.depth = parse_int(value, key);
  else if (key == "leak") e.leak = parse_real(value, key);
  else if (key == "candidates") e.candidates = parse_int(value, key);
  else if (key == "n_grid") e.n_grid = parse_grid(value);
  else if (key == "replicates") e.replicates = parse_int(value, key);
  else if (key == "seed") e.seed = parse_count(value, key);
  else if (key == "eval_cutoff") {
    if (value == "default") e.eval_cutoff.reset();
    else e.eval_cutoff = parse_int(value, key);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

}  // namespace

std::vector<RateExperiment> parse_rate_config(std::istream& is) {
  std::vector<RateExperiment> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ConfigError(at + "malformed section header");
      out.emplace_back();
      out.back().name = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + "expected key = value");
    if (out.empty()) throw ConfigError(at + "key outside of a [section]");
    try {
      apply(out.back(), trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(at + e.what());
    }
  }
  if (out.empty()) throw ConfigError("config defines no experiments");
  for (const auto& e : out) e.validate();
  return out;
}

std::vector<RateExperiment> load_rate_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_rate_config(in);
}

// --- rate experiments ---------------------------------------------------------

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw std::invalid_argument("slope fit needs at least two points");
  const double k = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [n, e] : points) {
    if (!(n > 0.0) || !(e > 0.0)) throw std::invalid_argument("slope fit needs positive n and error");
    mx += std::log(n);
    my += std::log(e);
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, e] : points) {
    const double dx = std::log(n) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(e) - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("slope fit needs distinct sample sizes");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (points.size() > 2) {
    double ssr = 0.0;
    for (const auto& [n, e] : points) {
      const double r = std::log(e) - (fit.intercept + fit.slope * std::log(n));
      ssr += r * r;
    }
    fit.stderr_ = std::sqrt(ssr / (k - 2.0) / sxx);
  }
  return fit;
}

double theory_exponent(const RateExperiment& cfg) {
  switch (cfg.family) {
    case Family::sobolev_truncated:
    case Family::kernel_smoothed:
      return rate_exponent_sobolev(cfg.alpha, cfg.beta, cfg.d);
    case Family::sobolev_empirical:
      return rate_exponent_empirical(cfg.beta, cfg.d);
    case Family::gaussian_gan:
      return 1.0;
    case Family::flow_gan:
      return 0.5;
  }
  return 0.0;
}

namespace {

constexpr int kTargetMaxFrequency = 8;

// Fixed per-experiment objects shared by all replicates.
struct RateContext {
  std::optional<FourierDensity> target;
  std::optional<GaussianModel> gaussian;
  std::vector<MlpGenerator> flows;  // candidates; the target is the middle one
  std::vector<double> flow_params;
  std::optional<DiscriminatorBank> bank;
  double clamp = 0.0;
};

GaussianModel gaussian_truth(int d) {
  Vector mean(d);
  Matrix a = Matrix::Identity(d, d);
  for (int i = 0; i < d; ++i) {
    mean(i) = 0.5 - 0.25 * i;
    a(i, i) = 1.0 + 0.5 * i;
    for (int j = 0; j < i; ++j) a(i, j) = 0.3;
  }
  return GaussianModel(mean, a);
}

MlpGenerator scaled_first_layer(const MlpGenerator& g, double t) {
  std::vector<Matrix> w = g.weights();
  w.front() *= 1.0 + t;
  return MlpGenerator(g.leak(), std::move(w), g.biases());
}

RateContext make_context(const RateExperiment& cfg) {
  RateContext ctx;
  switch (cfg.family) {
    case Family::sobolev_truncated:
    case Family::sobolev_empirical:
    case Family::kernel_smoothed:
      ctx.target = smooth_test_density(cfg.d, cfg.alpha, kTargetMaxFrequency);
      break;
    case Family::gaussian_gan:
      ctx.gaussian = gaussian_truth(cfg.d);
      break;
    case Family::flow_gan: {
      Philox rng(cfg.seed, 7);
      const MlpGenerator target = MlpGenerator::random(cfg.d, cfg.depth, cfg.leak, rng);
      const int k = cfg.candidates;
      for (int i = 0; i < k; ++i) {
        // odd k puts the target itself at the middle of the grid
        const double t = -0.25 + 0.5 * i / (k - 1.0);
        ctx.flow_params.push_back(t);
        ctx.flows.push_back(scaled_first_layer(target, t));
      }
      ctx.bank = DiscriminatorBank::pairwise(ctx.flows);
      ctx.clamp = default_clamp(ctx.flows);
      break;
    }
  }
  return ctx;
}

int eval_cutoff_for(const RateExperiment& cfg, std::uint64_t n) {
  return cfg.eval_cutoff ? *cfg.eval_cutoff : default_eval_cutoff(n, cfg.alpha, cfg.d);
}

double replicate_error(const RateExperiment& cfg, const RateContext& ctx, std::uint64_t n, std::uint64_t seed) {
  const WeightSequence w = WeightSequence::sobolev(cfg.beta);
  switch (cfg.family) {
    case Family::sobolev_truncated: {
      const SampleSet x = sample_density(*ctx.target, n, seed);
      const FourierDensity est = truncated_estimator(x, cfg.alpha, cfg.beta);
      return ipm_closed_form(ctx.target->coefficients(), est.coefficients(), w);
    }
    case Family::sobolev_empirical: {
      const SampleSet x = sample_density(*ctx.target, n, seed);
      return empirical_ipm(x, *ctx.target, w, std::max(eval_cutoff_for(cfg, n), ctx.target->cutoff()));
    }
    case Family::kernel_smoothed: {
      const SampleSet x = sample_density(*ctx.target, n, seed);
      const double h = std::pow(static_cast<double>(n), -1.0 / (2.0 * cfg.alpha + cfg.d));
      const FourierDensity est = kernel_smoothed_coeffs(x, h, eval_cutoff_for(cfg, n));
      return ipm_closed_form(ctx.target->coefficients(), est.coefficients(), w);
    }
    case Family::gaussian_gan: {
      Philox rng(seed);
      const PointMatrix data = ctx.gaussian->sample(n, rng);
      const GaussianModel fit = gaussian_gan_fit(data, cfg.p == 0 ? cfg.d : cfg.p);
      return gaussian_kl(fit, *ctx.gaussian);
    }
    case Family::flow_gan: {
      Philox data_rng(seed, 1), latent_rng(seed, 2);
      const std::size_t middle = ctx.flows.size() / 2;
      const MlpGenerator& target = ctx.flows.size() % 2 ? ctx.flows[middle] : ctx.flows.front();
      const double target_param = ctx.flows.size() % 2 ? ctx.flow_params[middle] : ctx.flow_params.front();
      const PointMatrix data = target.forward(uniform_latent(cfg.d, n, data_rng));
      const PointMatrix latent = uniform_latent(cfg.d, n, latent_rng);
      const GanResult r = enumerated_gan(ctx.flows, *ctx.bank, data, latent, ctx.clamp);
      return std::abs(ctx.flow_params[r.chosen] - target_param);
    }
  }
  return 0.0;
}

}  // namespace

double rate_replicate(const RateExperiment& cfg, std::uint64_t n, std::uint64_t seed) {
  cfg.validate();
  return replicate_error(cfg, make_context(cfg), n, seed);
}

RateResult run_rate_experiment(const RateExperiment& cfg) {
  cfg.validate();
  const RateContext ctx = make_context(cfg);
  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  const std::size_t tasks = cfg.n_grid.size() * reps;
  std::vector<RateRow> rows(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  const auto nt = static_cast<long long>(tasks);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long t = 0; t < nt; ++t) {
    const std::size_t i = static_cast<std::size_t>(t) / reps;
    const std::size_t r = static_cast<std::size_t>(t) % reps;
    RateRow& row = rows[static_cast<std::size_t>(t)];
    row.n = cfg.n_grid[i];
    row.replicate = static_cast<int>(r);
    row.seed = derive_seed(derive_seed(cfg.seed, i), r);
    try {
      row.error = replicate_error(cfg, ctx, row.n, row.seed);
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& row : rows)
    if (!std::isfinite(row.error) || row.error < 0.0) {
      std::ostringstream msg;
      msg << to_string(cfg.family) << ": invalid error " << row.error << " at n=" << row.n
          << " replicate=" << row.replicate << " seed=" << row.seed;
      throw std::runtime_error(msg.str());
    }

  RateResult res;
  res.config = cfg;
  res.rows = std::move(rows);
  res.theory_exponent = theory_exponent(cfg);
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    double s = 0.0;
    for (std::size_t r = 0; r < reps; ++r) s += res.rows[i * reps + r].error;
    res.mean_error.push_back(s / static_cast<double>(reps));
    if (res.mean_error.back() > 0.0) points.emplace_back(static_cast<double>(cfg.n_grid[i]), res.mean_error.back());
  }
  if (points.size() >= 2) {
    res.fit = fit_loglog_slope(points);
  } else {
    res.fit.slope = res.fit.stderr_ = res.fit.intercept = std::nan("");
  }
  return res;
}

void write_csv_header(std::ostream& os) { os << kCsvHeader << '\n'; }

void write_csv(std::ostream& os, const RateResult& result) {
  const auto& c = result.config;
  const std::string prefix = to_string(c.family) + ',' + std::to_string(c.d) + ',' + format_double(c.alpha) + ',' +
                             format_double(c.beta) + ',';
  for (const auto& row : result.rows)
    os << prefix << row.n << ',' << row.replicate << ',' << format_double(row.error) << ',' << row.seed << '\n';
  os << "#summary," << to_string(c.family) << ',' << format_double(result.fit.slope) << ','
     << format_double(result.fit.stderr_) << ',' << format_double(result.theory_exponent) << '\n';
}

// --- suites -------------------------------------------------------------------

std::size_t SuiteReport::violations() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; }));
}

std::string SuiteReport::to_json() const {
  nlohmann::ordered_json j;
  j["suite"] = suite;
  j["seed"] = seed;
  j["passed"] = passed();
  j["violations"] = violations();
  auto& arr = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json o;
    o["name"] = c.name;
    o["value"] = c.value;
    o["bound"] = c.bound;
    o["tolerance"] = c.tolerance;
    o["seed"] = c.seed;
    o["passed"] = c.passed;
    arr.push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"oracle_simple", "oracle_generalized", "inequalities", "lower_bounds",
                                              "flow_exactness"};
  return names;
}

namespace {

void add_le(SuiteReport& r, std::string name, double value, double bound, double tol, std::uint64_t seed) {
  r.checks.push_back({std::move(name), value, bound, tol, seed, value <= bound + tol});
}

void add_abs(SuiteReport& r, std::string name, double value, double target, double tol, std::uint64_t seed) {
  r.checks.push_back({std::move(name), value, target, tol, seed, std::abs(value - target) <= tol});
}

void suite_oracle_simple(SuiteReport& r, const SuiteOptions& opt) {
  const double sign = opt.inject_fault ? -1.0 : 1.0;
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t s = derive_seed(opt.seed, static_cast<std::uint64_t>(i));
    Philox rng(s);
    const int d = 1 + i % 2;
    const int cutoff = d == 1 ? 4 : 2;
    std::vector<FourierDensity> members;
    for (int k = 0; k < 4; ++k) members.push_back(random_fourier_density(d, cutoff, rng));
    const GeneratorFamily family(std::move(members));
    const FourierDensity target = random_fourier_density(d, cutoff, rng);
    const SampleSet x = sample_density(target, 64 + 32 * static_cast<std::size_t>(i % 4), derive_seed(s, 1));
    const CoefficientMap plugin = estimate_coefficient_map(x, cutoff);
    const WeightSequence w = WeightSequence::sobolev(0.5 * (i % 3));
    const SimpleOracleReport rep = check_simple_oracle(family, target.coefficients(), plugin, w);
    add_le(r, "simple_oracle/" + std::to_string(i), rep.lhs, rep.approximation + sign * 2.0 * rep.stochastic,
           kSimpleOracleTolerance, s);
  }
}

void suite_oracle_generalized(SuiteReport& r, const SuiteOptions& opt) {
  const double sign = opt.inject_fault ? -1.0 : 1.0;
  for (int i = 0; i < 6; ++i) {
    const std::uint64_t s = derive_seed(opt.seed, static_cast<std::uint64_t>(i));
    Philox rng(s);
    const int d = 1 + i % 2;
    const int depth = 2 + (i / 2) % 2;
    const MlpGenerator target = MlpGenerator::random(d, depth, 0.5, rng).centered_kinks();
    std::vector<MlpGenerator> family;
    for (int k = 0; k < 3; ++k) family.push_back(target.perturbed(0.15, rng));
    std::vector<MlpGenerator> all = family;
    all.push_back(target);
    const DiscriminatorBank bank = DiscriminatorBank::pairwise(all);
    const auto rep = check_generalized_oracle(family, bank, target, 200, 200, derive_seed(s, 1));
    const double bound = sign * (rep.approximation + 2.0 * rep.data_term + rep.generator_term + rep.latent_term);
    add_le(r, "generalized_oracle/" + std::to_string(i), rep.lhs, bound, 3.0 * rep.mc_stderr, s);
  }
}

void suite_inequalities(SuiteReport& r, const SuiteOptions& opt) {
  const double sign = opt.inject_fault ? -1.0 : 1.0;
  for (int i = 0; i < 20; ++i) {
    const std::uint64_t s = derive_seed(opt.seed, static_cast<std::uint64_t>(i));
    Philox rng(s);
    InequalityReport rep;
    if (i % 2 == 0) {
      const int d = 1 + (i / 2) % 2;
      const FourierDensity p = random_fourier_density(d, 3, rng), q = random_fourier_density(d, 3, rng);
      const GridSpec grid{Box::unit(d), d == 1 ? 512 : 64};
      rep = check_pinsker([&](std::span<const double> x) { return p(x); },
                          [&](std::span<const double> x) { return q(x); }, grid);
    } else {
      const MlpGenerator g = MlpGenerator::random(1, 2, 0.5, rng);
      const MlpGenerator h = g.perturbed(0.2, rng);
      Box bg = g.image_bounds(), bh = h.image_bounds();
      const Box box{{std::min(bg.lower[0], bh.lower[0])}, {std::max(bg.upper[0], bh.upper[0])}};
      auto density = [](const MlpGenerator& m) {
        return [&m](std::span<const double> x) { return std::exp(m.log_density(Vector::Constant(1, x[0]))); };
      };
      rep = check_pinsker(density(g), density(h), GridSpec{box, 2048});
    }
    const auto& v = rep.values;
    const std::string tag = "/" + std::to_string(i);
    const double tv2 = v.tv * v.tv;
    add_le(r, "pinsker" + tag, 2.0 * tv2, v.kl_pq_infinite ? INFINITY : sign * v.kl_pq, rep.tolerance, s);
    add_le(r, "le_cam" + tag, tv2, v.hellinger * v.hellinger, rep.tolerance, s);
    const double sym = v.kl_pq_infinite || v.kl_qp_infinite ? INFINITY : v.kl_pq + v.kl_qp;
    add_le(r, "symmetrized_kl" + tag, 4.0 * tv2, sym, rep.tolerance, s);
    add_le(r, "tv_hellinger" + tag, v.tv, v.hellinger, rep.tolerance, s);
  }
}

void suite_lower_bounds(SuiteReport& r, const SuiteOptions& opt) {
  const double sign = opt.inject_fault ? -1.0 : 1.0;
  const std::uint64_t s = opt.seed;
  const auto code = vg_code(64, s);
  int min_dist = 64;
  for (std::size_t a = 0; a < code.size(); ++a)
    for (std::size_t b = a + 1; b < code.size(); ++b) min_dist = std::min(min_dist, hamming(code[a], code[b]));
  add_le(r, "vg_code/size", 256.0, static_cast<double>(code.size()), 0.0, s);
  add_le(r, "vg_code/min_distance", 8.0, static_cast<double>(min_dist), 0.0, s);

  const BumpKernel k = calibrate_bump(2);
  for (int d = 1; d <= 2; ++d) {
    const int m = d == 1 ? 8 : 4;
    const auto words = vg_code(static_cast<int>(std::pow(m, d)), derive_seed(s, d));
    const HypothesisDensity g(words.back(), m, d, 2.0, k);
    const GridSpec grid{Box::unit(d), m * (d == 1 ? 512 : 64)};
    const auto mass = kernels::grid_integrals(grid, 1, [&](std::span<const double> x, std::span<double> out) {
      out[0] = g(x);
    });
    add_abs(r, "hypothesis/mass/d" + std::to_string(d), mass[0], 1.0, 1e-8, s);

    const BitVector& w = words[1];
    const BitVector& w2 = words.back();
    const HypothesisDensity gw(w, m, d, 2.0, k), gw2(w2, m, d, 2.0, k);
    const auto sep = kernels::grid_integrals(grid, 1, [&](std::span<const double> x, std::span<double> out) {
      out[0] = witness_value(w, w2, m, d, 1.0, k, x) * (gw(x) - gw2(x));
    });
    const double formula = sign * separation(w, w2, m, d, 2.0, 1.0, k);
    add_abs(r, "separation/d" + std::to_string(d), sep[0], formula, 1e-6 * std::abs(formula), s);
  }
  for (int n : {4, 10, 100, 1000}) {
    const LeCamPair pair = lecam_pair(n, 2);
    add_abs(r, "lecam/chi2/n" + std::to_string(n), pair.chi2(), 1.0 / n, 0.0, s);
    add_le(r, "lecam/product_chi2/n" + std::to_string(n), pair.product_chi2(), std::exp(1.0) - 1.0, 0.0, s);
  }
}

void suite_flow_exactness(SuiteReport& r, const SuiteOptions& opt) {
  const double sign = opt.inject_fault ? -1.0 : 1.0;
  for (int i = 0; i < 6; ++i) {
    const std::uint64_t s = derive_seed(opt.seed, static_cast<std::uint64_t>(i));
    Philox rng(s);
    const int d = 1 + i % 3;
    const int depth = 1 + i % 4;
    const MlpGenerator g = MlpGenerator::random(d, depth, 0.5, rng);
    const std::string tag = "/" + std::to_string(i);

    double roundtrip = 0.0;
    for (int k = 0; k < 1000; ++k) {
      Vector z(d);
      for (int j = 0; j < d; ++j) z(j) = rng.uniform();
      const auto back = g.inverse(g.forward(z));
      roundtrip = std::max(roundtrip, back ? (*back - z).cwiseAbs().maxCoeff() : INFINITY);
    }
    add_le(r, "roundtrip" + tag, roundtrip, 1e-9, 0.0, s);

    const MonteCarloEstimate mass = flow_normalization(g, 200000, derive_seed(s, 1));
    add_abs(r, "normalization" + tag, mass.value, 1.0, 3.0 * mass.stderr_ + 1e-9, s);

    const MlpGenerator other = g.perturbed(0.1, rng);
    const RealizedDiscriminator f = realize_discriminator(g, other);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      Vector z(d);
      for (int j = 0; j < d; ++j) z(j) = 0.01 + 0.98 * rng.uniform();
      const Vector x = g.forward(z);
      const double lo = other.log_density(x);
      if (lo == kNegativeInfinity) continue;
      worst = std::max(worst, std::abs(f(x) - sign * (g.log_density(x) - lo)));
    }
    add_le(r, "realizability" + tag, worst, 1e-8, 0.0, s);
  }
  Philox rng(opt.seed, 99);
  const MlpGenerator single = MlpGenerator::random(3, 1, 0.5, rng);
  const Vector x = single.forward(Vector(Vector::Constant(3, 0.5)));
  add_abs(r, "single_layer_log_density", single.log_density(x),
          -std::log(std::abs(single.weights()[0].determinant())), 1e-12, opt.seed);
}

}  // namespace

SuiteReport run_suite(const std::string& name, const SuiteOptions& options) {
  SuiteReport r;
  r.suite = name;
  r.seed = options.seed;
  if (name == "oracle_simple") suite_oracle_simple(r, options);
  else if (name == "oracle_generalized") suite_oracle_generalized(r, options);
  else if (name == "inequalities") suite_inequalities(r, options);
  else if (name == "lower_bounds") suite_lower_bounds(r, options);
  else if (name == "flow_exactness") suite_flow_exactness(r, options);
  else throw ConfigError("unknown suite '" + name + "'");
  return r;
}

}  // namespace advdens
