#pragma once

// Experiment runner: Monte-Carlo rate studies written as CSV, log-log slope
// fits, and self-checking suites that report pass/fail as JSON.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace advdens {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Family { sobolev_truncated, sobolev_empirical, kernel_smoothed, gaussian_gan, flow_gan };

std::string to_string(Family f);
Family parse_family(const std::string& s);

inline constexpr int kMinReplicates = 10;

struct RateExperiment {
  std::string name;
  Family family = Family::sobolev_truncated;
  int d = 1;
  double alpha = 2.0;
  double beta = 0.0;
  int p = 0;                         // gaussian_gan latent dimension, 0 means d
  int depth = 2;                     // flow_gan
  double leak = 0.5;                 // flow_gan
  int candidates = 21;               // flow_gan family size
  std::vector<std::uint64_t> n_grid;
  int replicates = 20;
  std::uint64_t seed = 1;
  std::optional<int> eval_cutoff;    // unset: 4 x optimal cutoff at each n

  /// Throws ConfigError on invalid settings.
  void validate() const;
};

/// Parses "key = value" lines grouped in [name] sections, one experiment per
/// section. '#' starts a comment. n_grid accepts a comma list or a power-of-two
/// range "2^8..2^16". Unknown keys are errors.
std::vector<RateExperiment> parse_rate_config(std::istream& is);
std::vector<RateExperiment> load_rate_config(const std::string& path);

struct RateRow {
  std::uint64_t n = 0;
  int replicate = 0;
  double error = 0.0;
  std::uint64_t seed = 0;
};

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
};

struct RateResult {
  RateExperiment config;
  std::vector<RateRow> rows;          // sorted by (n, replicate)
  std::vector<double> mean_error;     // per n_grid entry
  SlopeFit fit;                       // on (log n, log mean error)
  double theory_exponent = 0.0;
};

/// Ordinary least squares of log(error) on log(n). Needs >= 2 points and
/// positive values; stderr is 0 with exactly two points.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

/// Theory exponent of the family's error in n (error ~ n^-exponent).
double theory_exponent(const RateExperiment& cfg);

/// Error of one replicate at sample size n, seeded by `seed`.
double rate_replicate(const RateExperiment& cfg, std::uint64_t n, std::uint64_t seed);

/// Replicates run in parallel; each uses derive_seed(derive_seed(seed, n index), replicate).
RateResult run_rate_experiment(const RateExperiment& cfg);

inline constexpr const char* kCsvHeader = "family,d,alpha,beta,n,replicate,error,seed";

void write_csv_header(std::ostream& os);
/// Data rows, then "#summary,family,slope,stderr,theory_exponent".
void write_csv(std::ostream& os, const RateResult& result);

// --- suites -------------------------------------------------------------------

struct SuiteCheck {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  bool passed = false;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<SuiteCheck> checks;

  std::size_t violations() const;
  bool passed() const { return violations() == 0; }
  /// Pretty-printed JSON.
  std::string to_json() const;
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  /// Flips the sign of one fixture quantity per suite, to show the checks can fail.
  bool inject_fault = false;
};

const std::vector<std::string>& suite_names();

/// Throws ConfigError for an unknown suite name.
SuiteReport run_suite(const std::string& name, const SuiteOptions& options = {});

}  // namespace advdens
