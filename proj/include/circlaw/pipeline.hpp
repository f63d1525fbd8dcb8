#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "circlaw/distribution.hpp"
#include "circlaw/lsv.hpp"
#include "circlaw/spectral.hpp"
#include "circlaw/stats.hpp"

namespace circlaw {

/// Bad or missing configuration; the CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text with `#` comments. Later duplicates are an error.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

enum class ExperimentKind { circlaw, sparse, alpha0, lsv, condition, singularity, row_distance };

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(std::string_view s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::circlaw;
  AtomDistribution ensemble = AtomDistribution::bernoulli();
  std::vector<std::size_t> n_list;
  std::size_t trials = 5;
  std::uint64_t seed = 1;
  double grid_lo = -2.0;
  double grid_hi = 2.0;
  double grid_step = 0.02;
  std::optional<double> alpha;                                  // sparse.alpha
  std::vector<Complex> charfn_points{Complex(1, 0), Complex(0, 1), Complex(1, 1)};  // (u, v) = (Re, Im)
  std::vector<double> lsv_B{3.0};
  ShiftSpec shift = ShiftSpec::zero();
  RowSetup row_setup = RowSetup::random;
  std::string output;
  std::size_t jobs = 0;  // 0: OpenMP default
  bool timing = false;   // runtime_ms is 0 unless set, keeping the CSV byte-stable

  GridSpec grid() const { return GridSpec::uniform(grid_lo, grid_hi, grid_step); }
};

/// Validates and converts; unknown keys are rejected so typos do not pass silently.
ExperimentConfig experiment_config(const Config& cfg);

struct ResultRow {
  std::string experiment;
  std::size_t n = 0;
  long trial = 0;  // -1 marks a summary over all trials of this n
  std::uint64_t seed = 0;
  std::string statistic;
  double value = 0.0;
  double std_error = 0.0;
  double runtime_ms = 0.0;
};

inline constexpr std::string_view kCsvHeader = "experiment,n,trial,seed,statistic,value,stderr,runtime_ms";

struct RunReport {
  std::vector<ResultRow> rows;
  std::vector<std::string> errors;  // one message per failed trial
};

/// mix(root, fnv1a64(tag), n, trial).
std::uint64_t trial_seed(std::uint64_t root, std::string_view tag, std::size_t n, std::size_t trial);

/// CIRCLAW_JOBS if set to a positive integer, else `requested`, else the OpenMP default.
std::size_t resolve_jobs(std::size_t requested);

RunReport run_experiment(const ExperimentConfig& cfg);
RunReport run_circlaw(const ExperimentConfig& cfg);
RunReport run_sparse_circlaw(const ExperimentConfig& cfg);

struct Alpha0Summary {
  MeanStderr zero_row;
  MeanStderr origin;
  double expected_zero_row = 0.0;  // e^{-1}
  double band_sigma = 0.0;         // binomial sigma of the mean zero-row fraction
  bool zero_row_in_band = false;   // within 5 sigma of e^{-1}
  bool origin_dominates = false;   // origin >= zero_row - 2 sigma
};

/// rho = 1/n. Requires n >= 50.
Alpha0Summary degenerate_alpha0_check(std::size_t n, std::size_t trials, std::uint64_t seed,
                                      RunReport* report = nullptr, std::size_t jobs = 0,
                                      const AtomDistribution& dist = AtomDistribution::bernoulli());

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::string to_csv(const std::vector<ResultRow>& rows);
void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& is);
std::vector<ResultRow> read_csv_file(const std::string& path);

struct RateFit {
  double eta_prime = 0.0;
  double r_squared = 0.0;
  std::vector<std::size_t> ns;
  std::vector<double> mean_distance;
};

/// Least squares of log(mean sup_distance) on log n over per-trial rows.
RateFit fit_rate(const std::vector<ResultRow>& rows);
RateFit fit_rate(const std::string& csv_path);

/// Mean and stderr of `statistic` over finite per-trial rows with the given n; NaN if there are none.
MeanStderr summarize(const std::vector<ResultRow>& rows, std::size_t n, const std::string& statistic);

}  // namespace circlaw
