// Batch front-end: lemma checks, solves, verification, CC distance and the
// growth condition, each driven by one JSON config.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "lemma_suites.hpp"
#include "subell/analysis.hpp"
#include "subell/error.hpp"
#include "subell/io.hpp"

namespace fs = std::filesystem;
using namespace subell;

namespace {

enum Exit { ok = 0, property_failure = 1, config_error = 2, no_convergence = 3, hypothesis = 4 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::numerical:
    case ErrorKind::no_path: return no_convergence;
    default: return config_error;
  }
}

struct Options {
  std::string config;
  std::string out;
  int trials = 1000;
  std::uint64_t seed = 1;
};

fs::path output_dir(const Options& o, const RunConfig* cfg) {
  fs::path dir = !o.out.empty() ? fs::path(o.out) : cfg ? cfg->output : fs::path("out");
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  require(os.good(), ErrorKind::config, "cannot write " + path.string());
  os << j.dump(2) << '\n';
}

RunConfig need_config(const Options& o) {
  require(!o.config.empty(), ErrorKind::config, "--config is required for this command");
  return load_run_config(o.config);
}

int cmd_lemma_check(const Options& o) {
  std::optional<RunConfig> cfg;
  if (!o.config.empty()) cfg = load_run_config(o.config);
  const auto suites = cli::run_lemma_suites(o.trials, o.seed, cfg ? &*cfg : nullptr);
  json report{{"schema_version", kSchemaVersion}, {"seed", o.seed}, {"trials", o.trials}};
  json list = json::array();
  bool all = true;
  for (const auto& s : suites) {
    list.push_back(json{{"name", s.name}, {"passed", s.passed}, {"detail", s.detail}});
    std::cout << (s.passed ? "PASS " : "FAIL ") << s.name << '\n';
    if (!s.passed) std::cerr << "unexpected verdict in suite " << s.name << '\n';
    all = all && s.passed;
  }
  report["suites"] = list;
  report["passed"] = all;
  write_json(output_dir(o, cfg ? &*cfg : nullptr) / "lemma_report.json", report);
  return all ? ok : property_failure;
}

double max_error_vs_exact(const RunConfig& cfg, const GridFunction& u) {
  double err = 0.0;
  for (std::size_t i = 0; i < u.grid.size(); ++i)
    err = std::max(err, std::abs(u.values[i] - (*cfg.exact)(u.grid.point(i).coords)));
  return err;
}

int cmd_solve(const Options& o) {
  const RunConfig cfg = need_config(o);
  require(cfg.grid.has_value(), ErrorKind::config, "solve needs a grid");
  const OperatorSpec spec = make_operator(cfg);
  const Coefficients coeffs = make_coefficients(cfg, spec);
  const SolveConfig sc = make_solve_config(cfg);
  const Solution sol = solve(spec, coeffs, *cfg.grid, sc);

  const fs::path dir = output_dir(o, &cfg);
  {
    std::ofstream os(dir / "solution.csv");
    write_csv(os, sol.u);
  }
  json report = sol.report;
  report["structure"] = cfg.structure->name;
  report["operator"] = std::string(to_string(spec.kind));
  report["h"] = cfg.grid->h();
  if (cfg.exact) report["max_error_vs_exact"] = max_error_vs_exact(cfg, sol.u);
  if (cfg.two_box) report["two_box"] = two_box_sensitivity(spec, coeffs, *cfg.grid, sc);
  write_json(dir / "solve_report.json", report);
  std::cout << "converged=" << (sol.report.converged ? "true" : "false")
            << " iterations=" << sol.report.iterations << " residual=" << sol.report.residual
            << '\n';
  return sol.report.converged ? ok : no_convergence;
}

int cmd_verify(const Options& o) {
  const RunConfig cfg = need_config(o);
  require(cfg.grid.has_value(), ErrorKind::config, "verify needs a grid");
  const OperatorSpec spec = make_operator(cfg);
  const Coefficients coeffs = make_coefficients(cfg, spec);
  const Solution sol = solve(spec, coeffs, *cfg.grid, make_solve_config(cfg));
  const fs::path dir = output_dir(o, &cfg);
  if (!sol.report.converged) {
    write_json(dir / "solve_report.json", json(sol.report));
    std::cerr << "solver did not converge; residual " << sol.report.residual << '\n';
    return no_convergence;
  }
  VerifyOptions vo = cfg.verify;
  if (o.seed != 1) vo.sampling.seed = o.seed;
  const ConstantBundle k = make_constant_bundle(cfg, spec, coeffs, sol.u);
  const HolderReport rep = verify_theorem(spec, coeffs, sol.u, sol.report, k, vo);

  json j = rep;
  j["constants"] = k;
  j["solve"] = sol.report;
  j["seed"] = vo.sampling.seed;
  write_json(dir / "holder_report.json", j);
  {
    std::ofstream os(dir / "holder_bins.csv");
    write_bins_csv(os, rep.bins);
  }
  for (const auto& [name, v] : rep.hypothesis_verdicts)
    std::cout << name << '=' << (v.passed ? "pass" : "fail") << " (" << v.detail << ")\n";
  std::cout << "alpha_fit=" << rep.alpha_fit << " L_fit=" << rep.L_fit
            << " max_violation=" << rep.max_violation << '\n';
  if (!rep.hypotheses_pass()) {
    for (const auto& [name, v] : rep.hypothesis_verdicts)
      if (!v.passed) std::cerr << "hypothesis failed: " << name << "=fail\n";
    return hypothesis;
  }
  return rep.max_violation <= 0.0 ? ok : property_failure;
}

int cmd_cc_distance(const Options& o) {
  const RunConfig cfg = need_config(o);
  require(cfg.cc_a.has_value(), ErrorKind::config, "cc-distance needs a 'cc' section");
  CcOptions opts;
  opts.max_nodes = cfg.cc_max_nodes;
  const CcEstimate e = cc_distance_estimate(*cfg.structure, *cfg.cc_a, *cfg.cc_b,
                                            cfg.cc_resolution, opts);
  json j{{"schema_version", kSchemaVersion},
         {"structure", cfg.structure->name},
         {"a", cfg.cc_a->coords},
         {"b", cfg.cc_b->coords},
         {"resolution", cfg.cc_resolution},
         {"estimate", e},
         {"euclidean", euclidean_distance(*cfg.cc_a, *cfg.cc_b)}};
  write_json(output_dir(o, &cfg) / "cc_report.json", j);
  std::cout << "cc_distance=" << e.length << " moves=" << e.moves << '\n';
  return ok;
}

int cmd_growth_check(const Options& o) {
  const RunConfig cfg = need_config(o);
  double c0 = 0.0;
  if (cfg.growth_c0) c0 = *cfg.growth_c0;
  else if (cfg.c0) c0 = *cfg.c0;
  else if (cfg.c && cfg.c->constant) c0 = *cfg.c->constant;
  require(c0 > 0.0, ErrorKind::config, "growth-check needs c0 (growth.c0 or coefficients)");
  const double Lambda =
      cfg.growth_Lambda ? *cfg.growth_Lambda
                        : (cfg.kind == GKind::trace ? 1.0 : cfg.bounds.Lambda);
  std::vector<double> radii = cfg.growth_radii;
  if (radii.empty())
    for (int k = 0; k <= 10; ++k) radii.push_back(std::pow(2.0, k));
  const GrowthMargin g = growth_condition_margin(*cfg.structure, c0, Lambda, radii,
                                                 cfg.verify.growth_tol);
  json j{{"schema_version", kSchemaVersion},
         {"structure", cfg.structure->name},
         {"c0", c0},
         {"Lambda", Lambda},
         {"growth", g}};
  write_json(output_dir(o, &cfg) / "growth_report.json", j);
  std::cout << "growth_condition=" << (g.satisfied ? "pass" : "fail")
            << " tail_estimate=" << g.tail_estimate << '\n';
  return g.satisfied ? ok : hypothesis;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holder regularity toolkit for degenerate fully nonlinear equations"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "run configuration (JSON)");
    if (config_required) c->required();
    sub->add_option("--out", o.out, "output directory (overrides config 'output')");
    sub->add_option("--trials", o.trials, "randomized trial count")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "random seed");
  };
  auto* lemma = app.add_subcommand("lemma-check", "run the matrix and calculus lemma suites");
  add_common(lemma, false);
  auto* solve_cmd = app.add_subcommand("solve", "solve the configured equation");
  add_common(solve_cmd, true);
  auto* verify = app.add_subcommand("verify", "solve, then check hypotheses and Holder modulus");
  add_common(verify, true);
  auto* cc = app.add_subcommand("cc-distance", "estimate the Carnot-Caratheodory distance");
  add_common(cc, true);
  auto* growth = app.add_subcommand("growth-check", "evaluate the trace growth condition");
  add_common(growth, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config_error;
  }

  try {
    if (*lemma) return cmd_lemma_check(o);
    if (*solve_cmd) return cmd_solve(o);
    if (*verify) return cmd_verify(o);
    if (*cc) return cmd_cc_distance(o);
    if (*growth) return cmd_growth_check(o);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "error (config): " << e.what() << '\n';
    return config_error;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error (config): " << e.what() << '\n';
    return config_error;
  }
  return config_error;
}
