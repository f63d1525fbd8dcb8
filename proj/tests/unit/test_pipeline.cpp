#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <tuple>

#include "circlaw/pipeline.hpp"
#include "circlaw/rng.hpp"
#include "doctest.h"

using namespace circlaw;

namespace {

ExperimentConfig small_circlaw() {
  ExperimentConfig c;
  c.ensemble = AtomDistribution::real_gaussian();
  c.n_list = {8, 16, 32};
  c.trials = 3;
  c.seed = 42;
  return c;
}

std::vector<ResultRow> power_rows(double exponent, double scale) {
  std::vector<ResultRow> rows;
  for (std::size_t n : {64u, 128u, 256u, 512u}) {
    for (long t = 0; t < 3; ++t) {
      rows.push_back({"circlaw", n, t, 0, "sup_distance", scale * std::pow(static_cast<double>(n), -exponent), 0, 0});
    }
    rows.push_back({"circlaw", n, -1, 0, "sup_distance", 1e9, 0, 0});  // summary rows are ignored
  }
  return rows;
}

}  // namespace

TEST_CASE("config text") {
  const auto cfg = Config::parse("# comment\n experiment = sparse  # trailing\n\nn_list = 4, 8\nsparse.alpha=0.5\n");
  CHECK(cfg.get("experiment") == "sparse");
  CHECK(cfg.get("n_list") == "4, 8");
  CHECK(cfg.get_double("sparse.alpha", 0) == 0.5);
  CHECK(cfg.get_or("seed", "7") == "7");
  CHECK(cfg.get_u64("seed", 9) == 9);
  CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("just text\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse(" = 3\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("seed = -1\n").get_u64("seed", 0), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = 1.5q\n").get_double("x", 0), ConfigError);
  CHECK_THROWS_AS(Config::load("/nonexistent/circlaw.cfg"), ConfigError);
  CHECK_THROWS_AS(cfg.get("missing"), ConfigError);
}

TEST_CASE("experiment config validation") {
  const auto parse = [](const std::string& text) { return experiment_config(Config::parse(text)); };
  const auto c = parse("n_list = 8,16\nensemble = real_gaussian\ntrials = 2\nseed = 5\nlsv.B = 1,2\nlsv.shift = -1-1i\n");
  CHECK(c.kind == ExperimentKind::circlaw);
  CHECK(c.n_list == std::vector<std::size_t>{8, 16});
  CHECK(c.ensemble.kind() == AtomKind::real_gaussian);
  CHECK(c.lsv_B == std::vector<double>{1, 2});
  CHECK(c.shift.kind() == ShiftSpec::Kind::scalar);
  CHECK(c.shift.z() == Complex(-1, -1));
  CHECK(parse("n_list = 8\nensemble.kind = truncated(bernoulli,2)\n").ensemble.kind() == AtomKind::truncated);

  CHECK_THROWS_AS(parse("n_list = 8\nensemble = point_mass(0)\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 16,8\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 8,8\n"), ConfigError);
  CHECK_THROWS_AS(parse("ensemble = bernoulli\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 8\ntrials = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 8\nexperiment = sparse\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 8\nexperiment = sparse\nsparse.alpha = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 8\nexperiment = sparse\nsparse.alpha = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 20\nexperiment = alpha0\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 8\nexperiment = bogus\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 8\nensemble = gauss\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 8\ntrails = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 8\nlsv.shift = sideways\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 8\ngrid.step = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_list = 8\nensemble = normalized(bernoulli,0+0i,1e-200)\n"), ConfigError);
  CHECK(parse("n_list = 8\nexperiment = singularity\nensemble = point_mass(0)\n").kind == ExperimentKind::singularity);
}

TEST_CASE("trial seeds") {
  CHECK(trial_seed(7, "circlaw", 64, 3) == mix(mix(mix(7, fnv1a64("circlaw")), 64), 3));
  CHECK(trial_seed(7, "circlaw", 64, 3) != trial_seed(7, "sparse", 64, 3));
  CHECK(trial_seed(7, "circlaw", 64, 3) != trial_seed(7, "circlaw", 64, 4));
}

TEST_CASE("jobs resolution") {
  unsetenv("CIRCLAW_JOBS");
  CHECK(resolve_jobs(3) == 3);
  CHECK(resolve_jobs(0) >= 1);
  setenv("CIRCLAW_JOBS", "5", 1);
  CHECK(resolve_jobs(3) == 5);
  setenv("CIRCLAW_JOBS", "zero", 1);
  CHECK(resolve_jobs(3) == 3);
  unsetenv("CIRCLAW_JOBS");
}

TEST_CASE("csv format") {
  std::vector<ResultRow> rows{{"circlaw", 64, 0, 123, "sup_distance", 0.1, 0.0, 0.0},
                              {"lsv", 50, -1, 18446744073709551615ull, "rate@B=3", 1.0 / 3.0, 1e-300, 2.5},
                              {"lsv", 50, 2, 1, "condition", INFINITY, 0.0, 0.0}};
  const std::string text = to_csv(rows);
  CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  std::istringstream in(text);
  const auto back = read_csv(in);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].experiment == rows[i].experiment);
    CHECK(back[i].n == rows[i].n);
    CHECK(back[i].trial == rows[i].trial);
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].statistic == rows[i].statistic);
    CHECK(back[i].value == rows[i].value);
    CHECK(back[i].std_error == rows[i].std_error);
    CHECK(back[i].runtime_ms == rows[i].runtime_ms);
  }
  std::istringstream bad("n,trial\n");
  CHECK_THROWS(read_csv(bad));
  std::istringstream short_row(std::string(kCsvHeader) + "\ncirclaw,1,2\n");
  CHECK_THROWS(read_csv(short_row));
}

TEST_CASE("circular law runs are deterministic and well formed") {
  auto cfg = small_circlaw();
  cfg.jobs = 1;
  const auto a = run_circlaw(cfg);
  cfg.jobs = 3;
  const auto b = run_circlaw(cfg);
  CHECK(a.errors.empty());
  CHECK(to_csv(a.rows) == to_csv(b.rows));

  std::set<std::tuple<std::string, std::size_t, long, std::string>> keys;
  for (const auto& r : a.rows) {
    CHECK(keys.insert({r.experiment, r.n, r.trial, r.statistic}).second);
    CHECK(r.runtime_ms == 0.0);
    if (r.trial >= 0) CHECK(r.seed == trial_seed(42, "circlaw", r.n, static_cast<std::size_t>(r.trial)));
  }
  // Rows come in (n, trial) order with the summary last for each n.
  std::size_t prev_n = 0;
  long prev_trial = -2;
  for (const auto& r : a.rows) {
    if (r.n != prev_n) {
      CHECK(r.n > prev_n);
      prev_n = r.n;
      prev_trial = -2;
    }
    if (r.trial >= 0) CHECK(r.trial >= prev_trial);
    if (r.trial == -1) CHECK(r.statistic == "mean_sup_distance");
    prev_trial = r.trial == -1 ? 1 << 30 : r.trial;
  }
  for (const auto& r : a.rows) {
    if (r.statistic == "second_moment_ok") CHECK(r.value == 1.0);
    if (r.statistic == "sup_distance") CHECK((r.value > 0.0 && r.value < 1.0));
  }
  cfg.timing = true;
  const auto timed = run_circlaw(cfg);
  bool any_time = false;
  for (const auto& r : timed.rows) any_time = any_time || r.runtime_ms > 0.0;
  CHECK(any_time);
}

TEST_CASE("failing trials become error rows") {
  auto cfg = small_circlaw();
  cfg.n_list = {6};
  cfg.trials = 2;
  cfg.ensemble = parse_distribution("normalized(bernoulli,0+0i,1e-310)");
  const auto r = run_circlaw(cfg);
  REQUIRE(r.errors.size() == 2);
  std::size_t error_rows = 0;
  for (const auto& row : r.rows) {
    if (row.statistic == "error") {
      ++error_rows;
      CHECK(std::isnan(row.value));
      CHECK(row.seed == trial_seed(42, "circlaw", 6, static_cast<std::size_t>(row.trial)));
    }
    if (row.statistic == "mean_sup_distance") CHECK(std::isnan(row.value));
  }
  CHECK(error_rows == 2);
}

TEST_CASE("rate fitting") {
  auto fit = fit_rate(power_rows(0.5, 1.0));
  CHECK(fit.eta_prime == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.ns.size() == 4);
  fit = fit_rate(power_rows(0.0, 0.3));
  CHECK(fit.eta_prime == doctest::Approx(0.0).scale(1.0));
  CHECK(fit.r_squared == 1.0);
  auto few = power_rows(0.5, 1.0);
  few.erase(std::remove_if(few.begin(), few.end(), [](const ResultRow& r) { return r.n > 128; }), few.end());
  CHECK_THROWS(fit_rate(few));

  const auto path = (std::filesystem::temp_directory_path() / "circlaw_rate_test.csv").string();
  write_csv_file(path, power_rows(0.25, 2.0));
  CHECK(fit_rate(path).eta_prime == doctest::Approx(0.25));
  std::filesystem::remove(path);
  CHECK_THROWS(fit_rate(path));
}

TEST_CASE("sparse runs") {
  auto cfg = small_circlaw();
  cfg.kind = ExperimentKind::sparse;
  cfg.alpha = 0.8;
  const auto r = run_experiment(cfg);
  CHECK(r.errors.empty());
  bool saw_rho = false;
  for (const auto& row : r.rows) {
    CHECK(row.experiment == "sparse");
    if (row.statistic == "rho") {
      saw_rho = true;
      CHECK(row.value == doctest::Approx(std::pow(static_cast<double>(row.n), -0.2)));
    }
  }
  CHECK(saw_rho);
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(run_sparse_circlaw(cfg), ConfigError);
  cfg.alpha.reset();
  CHECK_THROWS_AS(run_sparse_circlaw(cfg), ConfigError);
}

TEST_CASE("degenerate sparsity") {
  RunReport report;
  const auto s = degenerate_alpha0_check(100, 10, 3, &report);
  CHECK(s.expected_zero_row == doctest::Approx(std::exp(-1.0)));
  CHECK(s.zero_row_in_band);
  CHECK(s.origin_dominates);
  for (const auto& r : report.rows) {
    if (r.trial < 0) continue;
    CHECK(r.value >= 0.0);
    CHECK(r.value <= 1.0);
  }
  // Each zero row forces a zero eigenvalue, trial by trial.
  for (long t = 0; t < 10; ++t) {
    double zero_rows = -1, origin = -1;
    for (const auto& r : report.rows) {
      if (r.trial != t) continue;
      if (r.statistic == "zero_row_fraction") zero_rows = r.value;
      if (r.statistic == "origin_fraction") origin = r.value;
    }
    CHECK(origin >= zero_rows);
  }
  CHECK_THROWS(degenerate_alpha0_check(49, 10, 3));
}

TEST_CASE("lsv, singularity and row distance experiments") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::lsv;
  cfg.ensemble = AtomDistribution::bernoulli();
  cfg.n_list = {10, 20};
  cfg.trials = 20;
  cfg.lsv_B = {0.5, 3.0};
  cfg.shift = ShiftSpec::scalar(Complex(-1, -1));
  const auto lsv = run_experiment(cfg);
  CHECK(lsv.errors.empty());
  double hits_half = -1, hits_three = -1;
  for (const auto& r : lsv.rows) {
    if (r.n == 20 && r.statistic == "hits@B=0.5") hits_half = r.value;
    if (r.n == 20 && r.statistic == "hits@B=3") hits_three = r.value;
  }
  CHECK(hits_three >= 0);
  CHECK(hits_half >= hits_three);
  CHECK(to_csv(lsv.rows) == to_csv(run_experiment(cfg).rows));

  cfg.kind = ExperimentKind::singularity;
  cfg.n_list = {1, 2, 3};
  const auto sing = run_experiment(cfg);
  REQUIRE(sing.rows.size() == 6);
  CHECK(sing.rows[2].statistic == "singular_prob");
  CHECK(sing.rows[2].value == 0.5);
  CHECK(sing.rows[3].value == 1.0);

  cfg.kind = ExperimentKind::row_distance;
  cfg.ensemble = AtomDistribution::real_gaussian();
  cfg.n_list = {5};
  cfg.trials = 2000;
  const auto rd = run_experiment(cfg);
  bool saw_ks = false;
  for (const auto& r : rd.rows) {
    if (r.statistic == "ks_half_normal") {
      saw_ks = true;
      CHECK(r.value < 0.05);
    }
  }
  CHECK(saw_ks);
}
