#include "circlaw/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "circlaw/ensembles.hpp"
#include "circlaw/linalg.hpp"
#include "circlaw/rng.hpp"

namespace circlaw {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t stop = s.find(sep, start);
    out.push_back(trim(s.substr(start, stop == std::string_view::npos ? std::string_view::npos : stop - start)));
    if (stop == std::string_view::npos) break;
    start = stop + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') throw ConfigError("config: '" + key + "' is not a number: '" + text + "'");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("config: '" + key + "' is not a nonnegative integer: '" + text + "'");
  }
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (errno == ERANGE) throw ConfigError("config: '" + key + "' is out of range");
  return v;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment", "ensemble", "ensemble.kind", "n_list", "trials", "seed", "grid.lo", "grid.hi", "grid.step",
      "sparse.alpha", "charfn.points", "lsv.B", "lsv.shift", "row.setup", "output", "jobs", "timing"};
  return keys;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::string b_label(double B) { return "@B=" + format_double(B); }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using TrialFn = std::vector<ResultRow> (*)(const ExperimentConfig&, std::size_t n, std::size_t trial,
                                           std::uint64_t seed);

// Runs fn for every (n, trial) with up to `jobs` threads and concatenates the
// buffered rows in (n, trial) order. A throwing trial becomes an error row.
RunReport run_trials(const ExperimentConfig& cfg, const std::string& tag, TrialFn fn) {
  struct Task {
    std::size_t n, trial;
  };
  std::vector<Task> tasks;
  for (std::size_t n : cfg.n_list) {
    for (std::size_t t = 0; t < cfg.trials; ++t) tasks.push_back({n, t});
  }
  std::vector<std::vector<ResultRow>> buffers(tasks.size());
  std::vector<std::string> errors(tasks.size());
  const int jobs = static_cast<int>(resolve_jobs(cfg.jobs));
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const Task task = tasks[k];
    const std::uint64_t seed = trial_seed(cfg.seed, tag, task.n, task.trial);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      buffers[k] = fn(cfg, task.n, task.trial, seed);
    } catch (const std::exception& e) {
      buffers[k] = {{tag, task.n, static_cast<long>(task.trial), seed, "error", kNaN, 0.0, 0.0}};
      errors[k] = tag + " n=" + std::to_string(task.n) + " trial=" + std::to_string(task.trial) + ": " + e.what();
    }
    const double ms = cfg.timing ? elapsed_ms(t0) : 0.0;
    for (ResultRow& r : buffers[k]) r.runtime_ms = ms;
  }
  RunReport report;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    report.rows.insert(report.rows.end(), buffers[k].begin(), buffers[k].end());
    if (!errors[k].empty()) report.errors.push_back(errors[k]);
  }
  return report;
}

std::vector<ResultRow> circlaw_trial(const ExperimentConfig& cfg, std::size_t n, std::size_t trial,
                                     std::uint64_t seed) {
  const std::string tag = to_string(cfg.kind);
  const bool sparse = cfg.kind == ExperimentKind::sparse;
  const double sigma = std::sqrt(cfg.ensemble.variance());
  std::optional<double> rho;
  MatrixSample sample;
  if (sparse) {
    const SparseSpec spec(*cfg.alpha);
    rho = spec.rho(n);
    sample = sample_sparse_matrix(cfg.ensemble, n, spec, seed);
  } else {
    sample = sample_matrix(cfg.ensemble, n, seed);
  }
  const Esd esd = esd_of_matrix(sample, sigma, rho);
  const auto row = [&](std::string stat, double value) {
    return ResultRow{tag, n, static_cast<long>(trial), seed, std::move(stat), value, 0.0, 0.0};
  };
  std::vector<ResultRow> rows;
  rows.push_back(row("sup_distance", sup_distance(esd, cfg.grid())));
  // The second-moment identity is stated for the dense normalization.
  if (!sparse) {
    const SecondMomentReport sm = second_moment_report(sample, esd, sigma);
    rows.push_back(row("second_moment_eigen", sm.eigen_side));
    rows.push_back(row("second_moment_entry", sm.entry_side));
    rows.push_back(row("second_moment_ok", sm.holds ? 1.0 : 0.0));
  } else {
    rows.push_back(row("rho", *rho));
  }
  for (const Complex& p : cfg.charfn_points) {
    const Complex emp = char_fn_empirical(esd, p.real(), p.imag());
    rows.push_back(row("charfn_err@" + format_complex(p), std::abs(emp - char_fn_disk(p.real(), p.imag()))));
  }
  return rows;
}

std::vector<ResultRow> alpha0_trial(const ExperimentConfig& cfg, std::size_t n, std::size_t trial,
                                    std::uint64_t seed) {
  const std::string tag = to_string(ExperimentKind::alpha0);
  const MatrixSample sample = sample_sparse_matrix(cfg.ensemble, n, SparseSpec(0.0), seed);
  const double sigma = std::sqrt(cfg.ensemble.variance());
  const Esd esd = esd_of_matrix(sample, sigma, 1.0 / static_cast<double>(n));
  std::size_t at_origin = 0;
  for (const Complex& z : esd.points) at_origin += std::abs(z) < 1e-9;
  const double nd = static_cast<double>(n);
  return {{tag, n, static_cast<long>(trial), seed, "zero_row_fraction", zero_row_fraction(sample.entries), 0.0, 0.0},
          {tag, n, static_cast<long>(trial), seed, "origin_fraction", static_cast<double>(at_origin) / nd, 0.0, 0.0}};
}

void append_summary(RunReport& report, const std::string& tag, const std::vector<std::size_t>& ns,
                    const std::vector<std::string>& stats, std::uint64_t root) {
  std::vector<ResultRow> out;
  // Summaries follow the per-trial rows of their n.
  for (std::size_t n : ns) {
    for (const ResultRow& r : report.rows) {
      if (r.n == n) out.push_back(r);
    }
    for (const std::string& s : stats) {
      const MeanStderr m = summarize(report.rows, n, s);
      out.push_back({tag, n, -1, root, "mean_" + s, m.mean, m.std_error, 0.0});
    }
  }
  report.rows = std::move(out);
}

RunReport run_lsv(const ExperimentConfig& cfg) {
  const std::string tag = to_string(cfg.kind);
  const TailStatistic stat = cfg.kind == ExperimentKind::condition ? TailStatistic::condition : TailStatistic::sigma_min;
  std::optional<SparseSpec> sparse;
  if (cfg.alpha) sparse = SparseSpec(*cfg.alpha);
  RunReport report;
  const int jobs = static_cast<int>(resolve_jobs(cfg.jobs));
  omp_set_num_threads(jobs);
  const std::uint64_t root = mix(cfg.seed, fnv1a64(tag));
  for (std::size_t n : cfg.n_list) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto samples = lsv_samples(cfg.ensemble, n, cfg.shift, cfg.trials, root, sparse);
    const double ms = cfg.timing ? elapsed_ms(t0) / static_cast<double>(samples.size()) : 0.0;
    for (std::size_t t = 0; t < samples.size(); ++t) {
      const LsvSample& s = samples[t];
      const auto row = [&](std::string name, double value) {
        return ResultRow{tag, n, static_cast<long>(t), s.seed, std::move(name), value, 0.0, ms};
      };
      if (s.failed) {
        report.rows.push_back(row("error", kNaN));
        report.errors.push_back(tag + " n=" + std::to_string(n) + " trial=" + std::to_string(t) + ": " + s.error);
        continue;
      }
      report.rows.push_back(row("sigma_min", s.sigma_min));
      report.rows.push_back(row("sigma_max", s.sigma_max));
      report.rows.push_back(row("condition", s.condition()));
      report.rows.push_back(row("singular", s.singular ? 1.0 : 0.0));
    }
    for (double B : cfg.lsv_B) {
      const LsvTailResult r = tail_from_samples(samples, n, B, stat);
      report.rows.push_back({tag, n, -1, root, "hits" + b_label(B), static_cast<double>(r.hits), 0.0, 0.0});
      report.rows.push_back({tag, n, -1, root, "rate" + b_label(B), r.rate, r.std_error, 0.0});
    }
    std::size_t failures = 0;
    for (const auto& s : samples) failures += s.failed;
    report.rows.push_back({tag, n, -1, root, "failures", static_cast<double>(failures), 0.0, 0.0});
  }
  return report;
}

RunReport run_singularity(const ExperimentConfig& cfg) {
  const std::string tag = to_string(cfg.kind);
  const std::uint64_t root = mix(cfg.seed, fnv1a64(tag));
  omp_set_num_threads(static_cast<int>(resolve_jobs(cfg.jobs)));
  RunReport report;
  for (std::size_t n : cfg.n_list) {
    const auto t0 = std::chrono::steady_clock::now();
    const ProbEstimate p = singularity_prob(cfg.ensemble, n, cfg.trials, root);
    const double ms = cfg.timing ? elapsed_ms(t0) : 0.0;
    report.rows.push_back({tag, n, -1, root, "singular_prob", p.value, p.std_error, ms});
    report.rows.push_back(
        {tag, n, -1, root, "exact", p.method == ProbMethod::exact_enumeration ? 1.0 : 0.0, 0.0, ms});
  }
  return report;
}

RunReport run_row_distance(const ExperimentConfig& cfg) {
  const std::string tag = to_string(cfg.kind);
  const std::uint64_t root = mix(cfg.seed, fnv1a64(tag));
  omp_set_num_threads(static_cast<int>(resolve_jobs(cfg.jobs)));
  RunReport report;
  for (std::size_t n : cfg.n_list) {
    const auto d = row_distance_experiment(cfg.ensemble, n, cfg.trials, root, cfg.row_setup);
    for (std::size_t t = 0; t < d.size(); ++t) {
      report.rows.push_back({tag, n, static_cast<long>(t), mix(root, n, t), "row_distance", d[t], 0.0, 0.0});
    }
    const MeanStderr m = mean_stderr(d);
    report.rows.push_back({tag, n, -1, root, "mean_row_distance", m.mean, m.std_error, 0.0});
    const AtomKind kind = cfg.ensemble.kind();
    if (kind == AtomKind::real_gaussian) {
      report.rows.push_back({tag, n, -1, root, "ks_half_normal", ks_statistic(d, half_normal_cdf), 0.0, 0.0});
    } else if (kind == AtomKind::complex_gaussian) {
      report.rows.push_back(
          {tag, n, -1, root, "ks_complex_gaussian", ks_statistic(d, complex_gaussian_distance_cdf), 0.0, 0.0});
    }
  }
  return report;
}

std::string format_row(const ResultRow& r) {
  std::string out = r.experiment;
  out += ',' + std::to_string(r.n);
  out += ',' + std::to_string(r.trial);
  out += ',' + std::to_string(r.seed);
  out += ',' + r.statistic;
  out += ',' + format_double(r.value);
  out += ',' + format_double(r.std_error);
  out += ',' + format_double(r.runtime_ms);
  return out;
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (cfg.has(key)) throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    cfg.set(key, value);
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: missing key '" + key + "'");
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? to_double(key, get(key)) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? to_u64(key, get(key)) : fallback;
}

std::vector<double> Config::get_double_list(const std::string& key, std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const std::string& item : split(get(key), ',')) out.push_back(to_double(key, item));
  return out;
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::circlaw:
      return "circlaw";
    case ExperimentKind::sparse:
      return "sparse";
    case ExperimentKind::alpha0:
      return "alpha0";
    case ExperimentKind::lsv:
      return "lsv";
    case ExperimentKind::condition:
      return "condition";
    case ExperimentKind::singularity:
      return "singularity";
    case ExperimentKind::row_distance:
      return "row_distance";
  }
  return "circlaw";
}

ExperimentKind parse_experiment_kind(std::string_view s) {
  for (ExperimentKind k : {ExperimentKind::circlaw, ExperimentKind::sparse, ExperimentKind::alpha0, ExperimentKind::lsv,
                           ExperimentKind::condition, ExperimentKind::singularity, ExperimentKind::row_distance}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("config: unknown experiment '" + std::string(s) + "'");
}

ExperimentConfig experiment_config(const Config& cfg) {
  for (const auto& [key, value] : cfg.entries()) {
    if (!known_keys().count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }
  ExperimentConfig out;
  out.kind = parse_experiment_kind(cfg.get_or("experiment", "circlaw"));
  if (cfg.has("ensemble") && cfg.has("ensemble.kind")) throw ConfigError("config: give ensemble or ensemble.kind, not both");
  const std::string ens = cfg.has("ensemble.kind") ? cfg.get("ensemble.kind") : cfg.get_or("ensemble", "bernoulli");
  try {
    out.ensemble = parse_distribution(ens);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ensemble: ") + e.what());
  }
  const double variance = out.ensemble.variance();
  if (out.kind != ExperimentKind::singularity && !(variance > 1e-12 && std::isfinite(variance))) {
    throw ConfigError("config: ensemble must have strictly positive finite variance");
  }

  if (!cfg.has("n_list")) throw ConfigError("config: missing key 'n_list'");
  for (const std::string& item : split(cfg.get("n_list"), ',')) out.n_list.push_back(to_u64("n_list", item));
  if (out.n_list.empty()) throw ConfigError("config: n_list is empty");
  if (!std::is_sorted(out.n_list.begin(), out.n_list.end()) ||
      std::adjacent_find(out.n_list.begin(), out.n_list.end()) != out.n_list.end()) {
    throw ConfigError("config: n_list must be strictly ascending");
  }
  if (out.n_list.front() < 1) throw ConfigError("config: n must be >= 1");
  out.trials = cfg.get_u64("trials", 5);
  if (out.trials < 1) throw ConfigError("config: trials must be >= 1");
  out.seed = cfg.get_u64("seed", 1);
  out.grid_lo = cfg.get_double("grid.lo", -2.0);
  out.grid_hi = cfg.get_double("grid.hi", 2.0);
  out.grid_step = cfg.get_double("grid.step", 0.02);
  if (!(out.grid_hi > out.grid_lo) || !(out.grid_step > 0.0)) throw ConfigError("config: bad grid");

  if (cfg.has("sparse.alpha")) out.alpha = cfg.get_double("sparse.alpha", 1.0);
  if (out.kind == ExperimentKind::sparse) {
    if (!out.alpha) throw ConfigError("config: sparse experiment needs sparse.alpha");
    if (!(*out.alpha > 0.0 && *out.alpha <= 1.0)) throw ConfigError("config: sparse.alpha must lie in (0, 1]");
  } else if (out.alpha && !(*out.alpha >= 0.0 && *out.alpha <= 1.0)) {
    throw ConfigError("config: sparse.alpha must lie in [0, 1]");
  }
  if (out.kind == ExperimentKind::alpha0 && out.n_list.front() < 50) throw ConfigError("config: alpha0 needs n >= 50");
  if (out.kind == ExperimentKind::row_distance && out.n_list.front() < 2) {
    throw ConfigError("config: row_distance needs n >= 2");
  }

  if (cfg.has("charfn.points")) {
    try {
      out.charfn_points = parse_complex_list(cfg.get("charfn.points"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: charfn.points: ") + e.what());
    }
  }
  out.lsv_B = cfg.get_double_list("lsv.B", {3.0});
  const std::string shift = cfg.get_or("lsv.shift", "zero");
  if (shift != "zero") {
    try {
      out.shift = ShiftSpec::scalar(parse_complex(shift));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config: lsv.shift must be 'zero' or a complex number");
    }
  }
  const std::string setup = cfg.get_or("row.setup", "random");
  if (setup == "fixed") {
    out.row_setup = RowSetup::fixed;
  } else if (setup != "random") {
    throw ConfigError("config: row.setup must be random or fixed");
  }
  out.output = cfg.get_or("output", "");
  out.jobs = cfg.get_u64("jobs", 0);
  const std::string timing = cfg.get_or("timing", "false");
  if (timing != "true" && timing != "false") throw ConfigError("config: timing must be true or false");
  out.timing = timing == "true";
  return out;
}

std::uint64_t trial_seed(std::uint64_t root, std::string_view tag, std::size_t n, std::size_t trial) {
  return mix(root, fnv1a64(tag), n, trial);
}

std::size_t resolve_jobs(std::size_t requested) {
  if (const char* env = std::getenv("CIRCLAW_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  if (requested > 0) return requested;
  return static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
}

RunReport run_circlaw(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.kind = ExperimentKind::circlaw;
  RunReport report = run_trials(c, "circlaw", circlaw_trial);
  append_summary(report, "circlaw", c.n_list, {"sup_distance"}, c.seed);
  return report;
}

RunReport run_sparse_circlaw(const ExperimentConfig& cfg) {
  if (!cfg.alpha || !(*cfg.alpha > 0.0 && *cfg.alpha <= 1.0)) {
    throw ConfigError("sparse circular law needs alpha in (0, 1]");
  }
  ExperimentConfig c = cfg;
  c.kind = ExperimentKind::sparse;
  RunReport report = run_trials(c, "sparse", circlaw_trial);
  append_summary(report, "sparse", c.n_list, {"sup_distance"}, c.seed);
  return report;
}

Alpha0Summary degenerate_alpha0_check(std::size_t n, std::size_t trials, std::uint64_t seed, RunReport* report,
                                      std::size_t jobs, const AtomDistribution& dist) {
  if (n < 50) throw std::invalid_argument("degenerate_alpha0_check: n must be >= 50");
  if (trials < 1) throw std::invalid_argument("degenerate_alpha0_check: trials must be >= 1");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::alpha0;
  cfg.ensemble = dist;
  cfg.n_list = {n};
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.jobs = jobs;
  RunReport r = run_trials(cfg, "alpha0", alpha0_trial);
  Alpha0Summary s;
  s.zero_row = summarize(r.rows, n, "zero_row_fraction");
  s.origin = summarize(r.rows, n, "origin_fraction");
  s.expected_zero_row = std::exp(-1.0);
  const double p = s.expected_zero_row;
  s.band_sigma = std::sqrt(p * (1.0 - p) / (static_cast<double>(n) * static_cast<double>(trials)));
  s.zero_row_in_band = std::abs(s.zero_row.mean - p) <= 5.0 * s.band_sigma;
  s.origin_dominates = s.origin.mean >= s.zero_row.mean - 2.0 * s.band_sigma;
  append_summary(r, "alpha0", {n}, {"zero_row_fraction", "origin_fraction"}, seed);
  if (report) *report = std::move(r);
  return s;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::circlaw:
      return run_circlaw(cfg);
    case ExperimentKind::sparse:
      return run_sparse_circlaw(cfg);
    case ExperimentKind::alpha0: {
      RunReport total;
      for (std::size_t n : cfg.n_list) {
        RunReport r;
        degenerate_alpha0_check(n, cfg.trials, cfg.seed, &r, cfg.jobs, cfg.ensemble);
        total.rows.insert(total.rows.end(), r.rows.begin(), r.rows.end());
        total.errors.insert(total.errors.end(), r.errors.begin(), r.errors.end());
      }
      return total;
    }
    case ExperimentKind::lsv:
    case ExperimentKind::condition:
      return run_lsv(cfg);
    case ExperimentKind::singularity:
      return run_singularity(cfg);
    case ExperimentKind::row_distance:
      return run_row_distance(cfg);
  }
  return {};
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  for (const ResultRow& r : rows) os << format_row(r) << '\n';
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(out, rows);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<ResultRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != kCsvHeader) {
    throw std::runtime_error("csv: header must be '" + std::string(kCsvHeader) + "'");
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected 8 fields");
    try {
      ResultRow r;
      r.experiment = f[0];
      r.n = std::stoull(f[1]);
      r.trial = std::stol(f[2]);
      r.seed = std::stoull(f[3]);
      r.statistic = f[4];
      r.value = std::strtod(f[5].c_str(), nullptr);
      r.std_error = std::strtod(f[6].c_str(), nullptr);
      r.runtime_ms = std::strtod(f[7].c_str(), nullptr);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": malformed field");
    }
  }
  return rows;
}

std::vector<ResultRow> read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in);
}

MeanStderr summarize(const std::vector<ResultRow>& rows, std::size_t n, const std::string& statistic) {
  std::vector<double> xs;
  for (const ResultRow& r : rows) {
    if (r.n == n && r.trial >= 0 && r.statistic == statistic && std::isfinite(r.value)) xs.push_back(r.value);
  }
  if (xs.empty()) return {kNaN, kNaN};
  return mean_stderr(xs);
}

RateFit fit_rate(const std::vector<ResultRow>& rows) {
  std::map<std::size_t, std::vector<double>> by_n;
  for (const ResultRow& r : rows) {
    if (r.trial >= 0 && r.statistic == "sup_distance" && std::isfinite(r.value)) by_n[r.n].push_back(r.value);
  }
  if (by_n.size() < 3) throw std::runtime_error("fit_rate: need sup_distance rows for at least 3 distinct n");
  RateFit fit;
  std::vector<double> x, y;
  for (const auto& [n, values] : by_n) {
    const double m = mean_stderr(values).mean;
    if (!(m > 0.0)) throw std::runtime_error("fit_rate: mean sup_distance must be positive");
    fit.ns.push_back(n);
    fit.mean_distance.push_back(m);
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(std::log(m));
  }
  const LinearFit lf = linear_fit(x, y);
  fit.eta_prime = -lf.slope;
  fit.r_squared = lf.r_squared;
  return fit;
}

RateFit fit_rate(const std::string& csv_path) { return fit_rate(read_csv_file(csv_path)); }

}  // namespace circlaw
