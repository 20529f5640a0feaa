// Command-line front end.
//
//   advdens rate --config <file> --out <csv>
//   advdens suite --name <suite> [--seed N]
//   advdens ipm --a <density-file> --b <density-file> --beta <beta>
//   advdens flow density --gen <file> --x <x1,x2,...>
//
// Exit status: 0 on success, 1 when a suite reports violations, 2 on
// invalid input. ADVDENS_WORKERS sets the number of worker threads.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "advdens/flow.hpp"
#include "advdens/fourier.hpp"
#include "advdens/harness.hpp"
#include "advdens/ipm.hpp"

namespace {

constexpr int kExitViolation = 1;
constexpr int kExitInput = 2;

void configure_workers() {
  const char* env = std::getenv("ADVDENS_WORKERS");
  if (!env) return;
  const int n = std::atoi(env);
  if (n < 1) throw advdens::ConfigError("ADVDENS_WORKERS must be a positive integer");
  omp_set_num_threads(n);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw advdens::ConfigError("cannot open '" + path + "'");
  return in;
}

int run_rate(const std::string& config, const std::string& out_path) {
  const auto experiments = advdens::load_rate_config(config);
  std::ofstream out(out_path);
  if (!out) throw advdens::ConfigError("cannot write '" + out_path + "'");
  advdens::write_csv_header(out);
  for (const auto& e : experiments) {
    const auto res = advdens::run_rate_experiment(e);
    advdens::write_csv(out, res);
    std::cerr << e.name << ": " << advdens::to_string(e.family) << " slope " << res.fit.slope << " +- "
              << res.fit.stderr_ << " (theory " << -res.theory_exponent << ")\n";
  }
  return 0;
}

int run_suite(const std::string& name, std::uint64_t seed) {
  advdens::SuiteOptions opt;
  opt.seed = seed;
  const auto report = advdens::run_suite(name, opt);
  std::cout << report.to_json();
  return report.passed() ? 0 : kExitViolation;
}

int run_ipm(const std::string& a_path, const std::string& b_path, double beta) {
  auto a_in = open_input(a_path);
  auto b_in = open_input(b_path);
  const auto a = advdens::read_density(a_in);
  const auto b = advdens::read_density(b_in);
  const double v = advdens::ipm_closed_form(a.coefficients(), b.coefficients(), advdens::WeightSequence::sobolev(beta));
  std::cout << advdens::format_double(v) << '\n';
  return 0;
}

int run_flow_density(const std::string& gen_path, const std::string& point) {
  auto in = open_input(gen_path);
  const auto g = advdens::read_generator(in);
  std::vector<double> coords;
  std::stringstream ss(point);
  std::string item;
  while (std::getline(ss, item, ',')) coords.push_back(advdens::parse_double(item));
  if (static_cast<int>(coords.size()) != g.dim())
    throw advdens::ConfigError("point has " + std::to_string(coords.size()) + " coordinates, generator expects " +
                               std::to_string(g.dim()));
  const advdens::Vector x = Eigen::Map<const advdens::Vector>(coords.data(), g.dim());
  const double v = g.log_density(x);
  std::cout << (v == advdens::kNegativeInfinity ? std::string("-inf") : advdens::format_double(v)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial density estimation toolkit"};
  app.require_subcommand(1);

  std::string config, out;
  auto* rate = app.add_subcommand("rate", "run rate experiments from a config file");
  rate->add_option("--config", config, "experiment config")->required();
  rate->add_option("--out", out, "CSV output path")->required();

  std::string suite_name;
  std::uint64_t seed = advdens::SuiteOptions{}.seed;
  auto* suite = app.add_subcommand("suite", "run a self-checking suite, print a JSON report");
  suite->add_option("--name", suite_name, "suite name")->required()->check(CLI::IsMember(advdens::suite_names()));
  suite->add_option("--seed", seed, "base seed");

  std::string a_path, b_path;
  double beta = 0.0;
  auto* ipm = app.add_subcommand("ipm", "Sobolev IPM between two Fourier densities");
  ipm->add_option("--a", a_path, "density file")->required();
  ipm->add_option("--b", b_path, "density file")->required();
  ipm->add_option("--beta", beta, "evaluation smoothness")->required()->check(CLI::NonNegativeNumber);

  std::string gen_path, point;
  auto* flow = app.add_subcommand("flow", "flow generator tools");
  flow->require_subcommand(1);
  auto* density = flow->add_subcommand("density", "log-density of a generator at a point");
  density->add_option("--gen", gen_path, "generator file")->required();
  density->add_option("--x", point, "comma-separated point")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    configure_workers();
    if (*rate) return run_rate(config, out);
    if (*suite) return run_suite(suite_name, seed);
    if (*ipm) return run_ipm(a_path, b_path, beta);
    if (*density) return run_flow_density(gen_path, point);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
