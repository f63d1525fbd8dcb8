#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "circlaw/gap.hpp"
#include "circlaw/inverse_lo.hpp"
#include "circlaw/pipeline.hpp"
#include "circlaw/smallball.hpp"
#include "circlaw/spectral.hpp"

namespace circlaw {

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> jobs;
  bool quiet = false;
  bool timing = false;
};

AtomDistribution ensemble_from(const std::string& text) {
  try {
    return parse_distribution(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--ensemble: ") + e.what());
  }
}

CoeffTuple coeffs_from(const std::string& flag, const std::string& text) {
  try {
    CoeffTuple v = parse_complex_list(text);
    if (v.empty()) throw std::invalid_argument("empty list");
    return v;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(flag + ": " + e.what());
  }
}

void emit(const GlobalOptions& g, const std::vector<ResultRow>& rows, std::ostream& out) {
  if (g.out.empty()) {
    write_csv(out, rows);
  } else {
    write_csv_file(g.out, rows);
  }
}

void report_errors(const GlobalOptions& g, const RunReport& r, std::ostream& err) {
  if (g.quiet) return;
  for (const auto& e : r.errors) err << "trial failed: " << e << '\n';
}

// Config file plus overriding global flags, with the experiment kind checked
// against what the subcommand accepts.
ExperimentConfig load_experiment(const GlobalOptions& g, const std::vector<ExperimentKind>& allowed,
                                 std::optional<double> alpha) {
  if (g.config.empty()) throw ConfigError("--config is required for this subcommand");
  Config cfg = Config::load(g.config);
  if (!cfg.has("experiment")) cfg.set("experiment", to_string(allowed.front()));
  if (alpha) cfg.set("sparse.alpha", format_double(*alpha));
  if (g.seed) cfg.set("seed", std::to_string(*g.seed));
  if (g.trials) cfg.set("trials", std::to_string(*g.trials));
  if (g.jobs) cfg.set("jobs", std::to_string(*g.jobs));
  if (g.timing) cfg.set("timing", "true");
  ExperimentConfig ec = experiment_config(cfg);
  bool ok = false;
  for (ExperimentKind k : allowed) ok = ok || k == ec.kind;
  if (!ok) throw ConfigError("experiment '" + to_string(ec.kind) + "' does not belong to this subcommand");
  return ec;
}

int run_config(const GlobalOptions& g, const std::vector<ExperimentKind>& allowed, std::optional<double> alpha,
               std::ostream& out, std::ostream& err) {
  ExperimentConfig ec = load_experiment(g, allowed, alpha);
  GlobalOptions dest = g;
  if (dest.out.empty()) dest.out = ec.output;
  const RunReport r = run_experiment(ec);
  report_errors(g, r, err);
  emit(dest, r.rows, out);
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random matrix circular-law laboratory", "circlaw"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "Experiment config file (key = value)");
  app.add_option("--seed", g.seed, "Root seed");
  app.add_option("--out", g.out, "Output CSV path (default stdout)");
  app.add_option("--trials", g.trials, "Trials per n")->check(CLI::PositiveNumber);
  app.add_option("--jobs", g.jobs, "Worker threads (CIRCLAW_JOBS overrides)")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "Suppress diagnostics");
  app.add_flag("--timing", g.timing, "Fill runtime_ms (otherwise 0, keeping output byte-stable)");

  std::function<int()> action;

  auto* circ = app.add_subcommand("circlaw", "Dense circular-law convergence (experiments circlaw, alpha0)");
  circ->callback([&] {
    action = [&] { return run_config(g, {ExperimentKind::circlaw, ExperimentKind::alpha0}, std::nullopt, out, err); };
  });

  std::optional<double> alpha;
  auto* sparse = app.add_subcommand("sparse", "Sparse circular law with rho = n^{-1+alpha}");
  sparse->add_option("--alpha", alpha, "Sparsity exponent in (0, 1]; overrides sparse.alpha");
  sparse->callback([&] { action = [&] { return run_config(g, {ExperimentKind::sparse}, alpha, out, err); }; });

  auto* lsv = app.add_subcommand("lsv", "Least singular value tails (experiments lsv, condition, singularity, row_distance)");
  lsv->callback([&] {
    action = [&] {
      return run_config(g,
                        {ExperimentKind::lsv, ExperimentKind::condition, ExperimentKind::singularity,
                         ExperimentKind::row_distance},
                        std::nullopt, out, err);
    };
  });

  std::string sb_ensemble = "bernoulli", sb_coeffs;
  double sb_radius = 0.5;
  std::optional<double> sb_mu;
  std::string sb_method = "auto";
  std::size_t sb_samples = 100000;
  auto* sb = app.add_subcommand("smallball", "Small ball probability p_r(v), or P_mu(v) with --mu");
  sb->add_option("--ensemble", sb_ensemble, "Atom law descriptor");
  sb->add_option("--coeffs", sb_coeffs, "Coefficients, comma separated complex numbers")->required();
  sb->add_option("--radius", sb_radius, "Ball radius")->check(CLI::NonNegativeNumber);
  sb->add_option("--mu", sb_mu, "Laziness for the concentration probability P_mu")->check(CLI::Range(0.0, 1.0));
  sb->add_option("--method", sb_method, "auto, exact, fourier or mc")
      ->check(CLI::IsMember({"auto", "exact", "fourier", "mc"}));
  sb->add_option("--samples", sb_samples, "Monte Carlo draws")->check(CLI::PositiveNumber);
  sb->callback([&] {
    action = [&] {
      const AtomDistribution dist = ensemble_from(sb_ensemble);
      const CoeffTuple v = coeffs_from("--coeffs", sb_coeffs);
      const std::uint64_t seed = g.seed.value_or(1);
      ProbEstimate p;
      std::string stat;
      if (sb_mu) {
        stat = "conc_prob";
        if (sb_method == "exact") {
          const auto e = conc_prob_exact(dist, *sb_mu, v);
          if (!e) throw std::runtime_error("support too large for exact enumeration");
          p = {*e, 0.0, ProbMethod::exact_enumeration};
        } else if (sb_method == "fourier") {
          p = conc_prob_fourier(dist, *sb_mu, v);
        } else {
          p = conc_prob_mc(dist, *sb_mu, v, sb_samples, seed, sb_method == "auto");
        }
      } else {
        stat = "small_ball_prob";
        SmallBallBudget budget;
        budget.samples = sb_samples;
        budget.seed = seed;
        if (sb_method == "mc") budget.support_cap = 0;
        p = small_ball_prob(dist, v, sb_radius, budget);
      }
      stat += "@" + to_string(p.method);
      if (p.lower_bound_only) stat += "@lower_bound";
      emit(g, {{"smallball", v.size(), -1, seed, stat, p.value, p.std_error, 0.0}}, out);
      return 0;
    };
  });

  std::string gap_gens, gap_dims;
  std::optional<double> lac_K, lac_R;
  auto* gap = app.add_subcommand("gap", "GAP size, properness, dispersion and lacunary basis");
  gap->add_option("--generators", gap_gens, "Generators, comma separated complex numbers")->required();
  gap->add_option("--dims", gap_dims, "Dimensions L_j, comma separated")->required();
  gap->add_option("--lacunary-K", lac_K, "Also extract a lacunary basis with this K >= 2");
  gap->add_option("--lacunary-R", lac_R, "Radius R for the lacunary basis (default 1)");
  gap->callback([&] {
    action = [&] {
      const auto gens = coeffs_from("--generators", gap_gens);
      std::vector<double> dims;
      for (const Complex& d : coeffs_from("--dims", gap_dims)) {
        if (d.imag() != 0.0) throw ConfigError("--dims must be real");
        dims.push_back(d.real());
      }
      Gap q;
      try {
        q = Gap(gens, dims);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      const GapPoints pts = enumerate(q);
      const std::size_t r = q.rank();
      std::vector<ResultRow> rows{
          {"gap", r, -1, 0, "size", static_cast<double>(pts.size()), 0, 0},
          {"gap", r, -1, 0, "multiplicity", static_cast<double>(pts.multiplicity_total), 0, 0},
          {"gap", r, -1, 0, "proper", pts.size() == pts.multiplicity_total ? 1.0 : 0.0, 0, 0},
          {"gap", r, -1, 0, "dispersion", dispersion(pts), 0, 0}};
      if (lac_K) {
        const LacunaryBasis lb = lacunary_basis(q, *lac_K, lac_R.value_or(1.0));
        rows.push_back({"gap", r, -1, 0, "lacunary_d", static_cast<double>(lb.d), 0, 0});
        rows.push_back({"gap", r, -1, 0, "lacunary_crude_constant", lb.crude_bound_constant, 0, 0});
        if (!g.quiet) {
          for (std::size_t i = 0; i < lb.d; ++i) {
            err << "w_" << i + 1 << " = " << format_complex(lb.primary[i]) << '\n';
          }
        }
      }
      emit(g, rows, out);
      return 0;
    };
  });

  std::string il_ensemble = "bernoulli", il_coeffs;
  std::size_t il_n = 0;
  double il_A = 1.0, il_B = 2.0;
  std::optional<double> il_eps, il_rho;
  bool il_normalize = false;
  auto* invlo = app.add_subcommand("invlo", "Rich/poor classification, or GAP structure search with --eps");
  invlo->add_option("--ensemble", il_ensemble, "Atom law descriptor");
  invlo->add_option("--coeffs", il_coeffs, "Vector coordinates, comma separated complex numbers")->required();
  invlo->add_option("--n", il_n, "Dimension parameter n (default: number of coordinates)");
  invlo->add_option("--A", il_A, "Exponent A");
  invlo->add_option("--B", il_B, "Exponent B");
  invlo->add_flag("--normalize", il_normalize, "Scale the vector to unit length first");
  invlo->add_option("--eps", il_eps, "Run the structure search with this eps in (0, 1/2)");
  invlo->add_option("--rho", il_rho, "Sparse structure search with this rho");
  invlo->callback([&] {
    action = [&] {
      const AtomDistribution dist = ensemble_from(il_ensemble);
      CoeffTuple v = coeffs_from("--coeffs", il_coeffs);
      const std::size_t n = il_n ? il_n : v.size();
      const std::uint64_t seed = g.seed.value_or(1);
      std::vector<ResultRow> rows;
      if (il_eps) {
        GapReport rep;
        try {
          rep = il_rho ? structure_search_sparse(dist, v, n, *il_eps, *il_rho, 10, {}, seed)
                       : structure_search(dist, v, n, *il_eps, 10, {}, seed);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        rows = {{"invlo", n, -1, seed, "r", static_cast<double>(rep.r), 0, 0},
                {"invlo", n, -1, seed, "k", static_cast<double>(rep.k), 0, 0},
                {"invlo", n, -1, seed, "dispersion", rep.dispersion_final, 0, 0},
                {"invlo", n, -1, seed, "exceptional_count", static_cast<double>(rep.exceptional_count), 0, 0},
                {"invlo", n, -1, seed, "terminated_normally", rep.terminated_normally ? 1.0 : 0.0, 0, 0}};
        for (std::size_t i = 0; i < rep.generators.size(); ++i) {
          const std::string idx = "@" + std::to_string(i + 1);
          rows.push_back({"invlo", n, -1, seed, "generator_re" + idx, rep.generators[i].real(), 0, 0});
          rows.push_back({"invlo", n, -1, seed, "generator_im" + idx, rep.generators[i].imag(), 0, 0});
        }
        if (!g.quiet) err << "stop: " << rep.stop_reason << "; generators: " << format_generators(rep.generators) << '\n';
      } else {
        if (il_normalize) {
          double s = 0;
          for (const auto& z : v) s += std::norm(z);
          if (!(s > 0)) throw ConfigError("--coeffs is the zero vector");
          for (auto& z : v) z /= std::sqrt(s);
        }
        RichPoorVerdict verdict;
        try {
          SmallBallBudget budget;
          budget.seed = seed;
          verdict = classify_rich_poor(dist, v, n, il_A, il_B, budget);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        rows = {{"invlo", n, -1, seed, "p_beta", verdict.p_est.value, verdict.p_est.std_error, 0},
                {"invlo", n, -1, seed, "threshold", verdict.threshold, 0, 0},
                {"invlo", n, -1, seed, "beta", verdict.beta, 0, 0},
                {"invlo", n, -1, seed, "poor", verdict.verdict == Verdict::poor ? 1.0 : 0.0, 0, 0}};
        if (!g.quiet) err << "verdict: " << to_string(verdict.verdict) << '\n';
      }
      emit(g, rows, out);
      return 0;
    };
  });

  std::string esd_ensemble = "bernoulli";
  std::size_t esd_n = 64;
  std::optional<double> esd_alpha;
  auto* esd = app.add_subcommand("esd", "Eigenvalues of normalized sampled matrices (rows re@k, im@k)");
  esd->add_option("--ensemble", esd_ensemble, "Atom law descriptor");
  esd->add_option("--n", esd_n, "Matrix size")->check(CLI::PositiveNumber);
  esd->add_option("--alpha", esd_alpha, "Sparse sampling with rho = n^{-1+alpha}");
  esd->callback([&] {
    action = [&] {
      const AtomDistribution dist = ensemble_from(esd_ensemble);
      const double var = dist.variance();
      if (!(var > 1e-12) || !std::isfinite(var)) throw ConfigError("--ensemble must have positive finite variance");
      const std::size_t trials = g.trials.value_or(1);
      const std::uint64_t root = g.seed.value_or(1);
      std::optional<SparseSpec> spec;
      if (esd_alpha) {
        if (!(*esd_alpha > 0.0 && *esd_alpha <= 1.0)) throw ConfigError("--alpha must lie in (0, 1]");
        spec = SparseSpec(*esd_alpha);
      }
      std::vector<ResultRow> rows;
      for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t seed = trial_seed(root, "esd", esd_n, t);
        const MatrixSample s = spec ? sample_sparse_matrix(dist, esd_n, *spec, seed) : sample_matrix(dist, esd_n, seed);
        const Esd e = esd_of_matrix(s, std::sqrt(var), spec ? std::optional<double>(spec->rho(esd_n)) : std::nullopt);
        for (std::size_t k = 0; k < e.points.size(); ++k) {
          const std::string idx = "@" + std::to_string(k);
          rows.push_back({"esd", esd_n, static_cast<long>(t), seed, "re" + idx, e.points[k].real(), 0, 0});
          rows.push_back({"esd", esd_n, static_cast<long>(t), seed, "im" + idx, e.points[k].imag(), 0, 0});
        }
      }
      emit(g, rows, out);
      return 0;
    };
  });

  std::string rate_csv;
  auto* rate = app.add_subcommand("rate", "Fit the convergence rate eta' from a CSV with sup_distance rows");
  rate->add_option("csv", rate_csv, "Pipeline CSV")->required();
  rate->callback([&] {
    action = [&] {
      const RateFit fit = fit_rate(rate_csv);
      out << "eta_prime = " << format_double(fit.eta_prime) << " r_squared = " << format_double(fit.r_squared)
          << '\n';
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return 1;
  }
  try {
    return action ? action() : 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace circlaw
