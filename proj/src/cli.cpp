#include "exitctl/cli.hpp"

#include "exitctl/acceptance.hpp"
#include "exitctl/csv.hpp"
#include "exitctl/girsanov.hpp"
#include "exitctl/pde_oracle.hpp"
#include "exitctl/variation.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace exitctl {

namespace {

std::vector<VectorFieldPtr> basis_probes(const BasisPtr& basis) {
  std::vector<VectorFieldPtr> probes;
  for (std::size_t i = 0; i < basis->size(); ++i) probes.push_back(std::make_shared<BasisGradientField>(basis, i));
  return probes;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

void write_estimator_row(CsvWriter& w, const std::string& q, const std::string& i, const std::string& j, double mean,
                         double se, std::size_t n) {
  w << q << i << j << mean << se << std::uint64_t{n};
  w.end_row();
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  auto ctrl = make_controller(cfg, false);
  const BatchStats batch = sample_batch(cfg.problem, *ctrl, cfg.sim, cfg.n_traj);
  write_trajectories_csv(batch, cfg.problem.dimension, cfg.output_dir / "trajectories.csv");
  for (const auto& w : batch.warnings) log << "warning: " << w << "\n";
  log << "simulated " << batch.paths.size() << " paths, " << batch.n_exited << " exited; mean tau "
      << format_double(batch.tau.mean) << " (se " << format_double(batch.tau.std_error) << ")\n";
  return kExitOk;
}

int cmd_estimate(const ExperimentConfig& cfg, std::ostream& log) {
  const double sigma = cfg.problem.sigma;
  auto ctrl = make_controller(cfg, true);
  const BatchStats batch = sample_batch(cfg.problem, *ctrl, cfg.sim, cfg.n_traj);
  for (const auto& w : batch.warnings) log << "warning: " << w << "\n";

  const auto k1 = summarize(batch.collect([&](const PathStats& p) { return k_estimator(p, sigma, 1).value; }));
  const auto psi = summarize(
      batch.collect([&](const PathStats& p) { return std::exp(-sigma * k_estimator(p, sigma, 1).value); }));
  const EstimatorResult phi = estimate_functional(batch, sigma);

  CsvWriter w(cfg.output_dir / "estimator.csv");
  w.header({"quantity", "i", "j", "mean", "std_error", "n_samples"});
  const std::size_t n = batch.n_exited;
  write_estimator_row(w, "tau", "", "", batch.tau.mean, batch.tau.std_error, n);
  write_estimator_row(w, "W", "", "", batch.W.mean, batch.W.std_error, n);
  write_estimator_row(w, "phi_hat", "", "", phi.mean, phi.std_error, n);
  write_estimator_row(w, "K1", "", "", k1.mean, k1.std_error, n);
  write_estimator_row(w, "var_K1", "", "", k1.variance, 0.0, n);
  write_estimator_row(w, "psi_hat", "", "", psi.mean, psi.std_error, n);
  // Delta method for F = -log(psi) / sigma.
  const double F = psi.mean > 0 ? -std::log(psi.mean) / sigma : std::nan("");
  write_estimator_row(w, "F_hat", "", "", F, psi.mean > 0 ? psi.std_error / (sigma * psi.mean) : std::nan(""), n);

  const GradHess gh = estimate_gradient_hessian(batch, sigma, cfg.estimate.form);
  for (std::size_t i = 0; i < gh.n; ++i)
    write_estimator_row(w, "grad", std::to_string(i + 1), "", gh.grad[i], gh.grad_se[i], n);
  if (cfg.estimate.hessian)
    for (std::size_t i = 0; i < gh.n; ++i)
      for (std::size_t j = 0; j < gh.n; ++j)
        write_estimator_row(w, "hess", std::to_string(i + 1), std::to_string(j + 1), gh.h(i, j),
                            gh.hess_se[i * gh.n + j], n);

  log << "phi_hat " << format_double(phi.mean) << " (se " << format_double(phi.std_error) << "), psi_hat "
      << format_double(psi.mean) << ", var K1 " << format_double(k1.variance) << "\n";
  log << "gradient " << join(gh.grad) << "\n";
  return kExitOk;
}

int cmd_descend(const ExperimentConfig& cfg, std::ostream& log) {
  DescentConfig dc = cfg.descent;
  if (cfg.resume) dc = resume_from_checkpoint(dc, *cfg.resume);
  const DescentTrace trace = run_descent(cfg.problem, cfg.basis, dc, cfg.sim);
  write_trace_csv(trace, cfg.output_dir / "trace.csv");
  write_checkpoint(trace, dc, cfg.output_dir / "checkpoint.json");
  for (const auto& w : trace.warnings) log << "warning: " << w << "\n";
  const auto& last = trace.records.back();
  log << "status " << trace.status << " after " << trace.records.size() << " rows; phi_hat "
      << format_double(last.phi_hat) << ", |grad| " << format_double(last.grad_norm) << "\n";
  log << "a " << join(last.a) << "\n";
  if (auto av = trace.averaged()) log << "averaged a " << join(av->a) << "\n";
  if (!trace.diagnostic.empty()) log << trace.diagnostic << "\n";
  return trace.status == "diverged" ? kExitRuntime : kExitOk;
}

int cmd_pde(const ExperimentConfig& cfg, std::ostream& log) {
  const Grid grid = make_grid(*cfg.problem.domain, cfg.pde.h);
  const PdeSolution sol = solve_feynman_kac(cfg.problem, grid);
  write_solution_csv(sol, cfg.output_dir / "solution.csv");
  for (const auto& w : sol.warnings) log << "warning: " << w << "\n";
  const HjbResidual res = hjb_residual(sol, cfg.problem);
  const double psi0 = interpolate_nodal(sol.grid, sol.psi, cfg.problem.start);
  const double F0 = interpolate_nodal(sol.grid, sol.F, cfg.problem.start);

  CsvWriter w(cfg.output_dir / "pde_summary.csv");
  w.header({"quantity", "value"});
  w << std::string("psi_start") << psi0;
  w.end_row();
  w << std::string("F_start") << F0;
  w.end_row();
  w << std::string("hjb_max_residual") << res.max_norm;
  w.end_row();
  w << std::string("upwind_nodes") << std::uint64_t{sol.upwind_nodes};
  w.end_row();
  log << "psi(start) " << format_double(psi0) << ", F(start) " << format_double(F0) << ", HJB residual "
      << format_double(res.max_norm) << "\n";

  VectorFieldPtr u;
  if (cfg.control.kind != "zero") {
    auto ctrl = make_controller(cfg, false);
    u = std::make_shared<FunctionVectorField>(
        cfg.problem.dimension, [ctrl](std::span<const double> x, std::span<double> out) { ctrl->evaluate(x, out, {}); });
  }
  if (cfg.pde.mgf_lambda) {
    const MgfResult m = exit_mgf(cfg.problem, grid, u, *cfg.pde.mgf_lambda);
    const double v0 = m.ok ? interpolate_nodal(grid, m.v, cfg.problem.start) : std::nan("");
    w << std::string("mgf_start") << v0;
    w.end_row();
    log << "E[exp(lambda tau)] at start " << (m.ok ? format_double(v0) : "unavailable: " + m.reason) << "\n";
  }
  if (cfg.pde.mgf_threshold) {
    const MgfThreshold t = exit_mgf_threshold(cfg.problem, grid, u);
    w << std::string("lambda_star") << t.lambda_star;
    w.end_row();
    log << "lambda* " << format_double(t.lambda_star) << " in [" << format_double(t.lower) << ", "
        << format_double(t.upper) << "]\n";
  }
  return kExitOk;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& log) {
  AcceptanceOptions opt;
  opt.criteria = cfg.verify.criteria;
  opt.seed = cfg.sim.seed;
  opt.scratch_dir = cfg.output_dir / "verify_scratch";
  opt.log = &log;
  std::ofstream report(cfg.output_dir / "report.txt");
  bool all = true;
  for (int id : opt.criteria) {
    const CriterionResult r = run_criterion(id, opt);
    const std::string line = format_criterion(r);
    log << line << "\n" << std::flush;
    report << line << "\n" << std::flush;
    all = all && r.passed;
  }
  std::filesystem::remove_all(opt.scratch_dir);
  return all ? kExitOk : kExitVerify;
}

}  // namespace

std::shared_ptr<const Controller> make_controller(const ExperimentConfig& cfg, bool with_probes) {
  const std::size_t d = cfg.problem.dimension;
  const auto& c = cfg.control;
  if (c.kind == "basis" || (c.kind == "zero" && with_probes))
    return std::make_shared<BasisController>(
        cfg.basis, ControlVector{c.kind == "basis" ? c.coefficients : std::vector<double>(cfg.basis->size(), 0.0)},
        with_probes);
  auto probes = with_probes ? basis_probes(cfg.basis) : std::vector<VectorFieldPtr>{};
  if (c.kind == "zero") return std::make_shared<FieldController>(d, nullptr, probes);
  if (c.kind == "constant")
    return std::make_shared<FieldController>(d, std::make_shared<ConstantVectorField>(c.value), probes);
  const PdeSolution sol = solve_feynman_kac(cfg.problem, make_grid(*cfg.problem.domain, c.pde_h));
  return std::make_shared<FieldController>(d, optimal_control_field(sol), probes);
}

int run_command(const std::string& cmd, const ExperimentConfig& cfg, std::ostream& log) {
  try {
    std::filesystem::create_directories(cfg.output_dir);
    write_resolved_config(cfg);
    if (cmd == "simulate") return cmd_simulate(cfg, log);
    if (cmd == "estimate") return cmd_estimate(cfg, log);
    if (cmd == "descend") return cmd_descend(cfg, log);
    if (cmd == "pde") return cmd_pde(cfg, log);
    if (cmd == "verify") return cmd_verify(cfg, log);
    log << "error: unknown command '" << cmd << "'\n";
    return kExitConfig;
  } catch (const UnsupportedDimension& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"exitctl: importance sampling of exit-time functionals with basis controls"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> output;
  app.add_option("command", command, "simulate | estimate | descend | pde | verify")
      ->required()
      ->check(CLI::IsMember({"simulate", "estimate", "descend", "pde", "verify"}));
  app.add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
  app.add_option("--seed", seed, "Overrides sim.seed and descent.seed");
  app.add_option("--threads", threads, "Worker threads (falls back to EXITCTL_THREADS)")->check(CLI::PositiveNumber);
  app.add_option("--output", output, "Overrides output_dir");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (!threads) {
    if (const char* env = std::getenv("EXITCTL_THREADS"); env && *env) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (*end != '\0' || v < 1) {
        std::cerr << "config error: EXITCTL_THREADS must be a positive integer\n";
        return kExitConfig;
      }
      threads = static_cast<int>(v);
    }
  }
  if (threads) omp_set_num_threads(*threads);

  ExperimentConfig cfg;
  try {
    std::string text = "{}";
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "config error: cannot read " << config_path << "\n";
        return kExitConfig;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    cfg = parse_config(text);
    if (seed) override_seed(cfg, *seed);
    if (output) override_output_dir(cfg, *output);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return run_command(command, cfg, std::cerr);
}

}  // namespace exitctl
