// Command-line driver: kplate solve --config <file> [overrides]

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "kplate/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct SolveOptions {
  std::string config_path;
  std::optional<std::string> preset;
  std::optional<double> eps;
  std::optional<std::string> mode;
  std::optional<int> steps;
  std::optional<std::string> out;
};

kplate::ExperimentConfig resolve(const SolveOptions& o) {
  kplate::ExperimentConfig c = o.config_path.empty() ? kplate::ExperimentConfig{} : kplate::load_config(o.config_path);
  if (o.preset) {
    const kplate::Preset p = kplate::parse_preset(*o.preset);
    if (p != c.preset) {
      // Switching preset keeps the explicitly chosen numerics.
      kplate::ExperimentConfig d = kplate::preset_defaults(p);
      d.initial_subdivision = c.initial_subdivision;
      d.mode = c.mode;
      d.steps = c.steps;
      d.alpha = c.alpha;
      d.tol = c.tol;
      d.theta = c.theta;
      d.max_iterations = c.max_iterations;
      d.mesh_size = c.mesh_size;
      d.young = c.young;
      d.poisson = c.poisson;
      d.thickness = c.thickness;
      d.output = c.output;
      d.resolution = c.resolution;
      d.seed = c.seed;
      c = d;
    }
  }
  if (o.eps) c.eps = *o.eps;
  if (o.mode) c.mode = kplate::parse_mode(*o.mode);
  if (o.steps) c.steps = *o.steps;
  if (o.out) c.output = *o.out;
  kplate::validate(c, "command line");
  return c;
}

int run_solve(const SolveOptions& options) {
  kplate::ExperimentConfig config;
  try {
    config = resolve(options);
  } catch (const kplate::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const kplate::RunResult result = kplate::run_experiment(config);
    for (const kplate::HistoryRow& row : result.history) {
      std::printf("step %d  N %d  eta %.6g  S %.6g  eta+S %.6g  iterations %d%s\n", row.step, row.n, row.eta, row.s,
                  row.eta_plus_s(), row.iterations, row.converged ? "" : "  (not converged)");
    }
    if (result.failure) {
      std::cerr << "solver failure: " << *result.failure << '\n';
      return kExitSolver;
    }
    if (result.history.size() >= 2)
      std::printf("slope of eta+S over the last rows: %.4f\n", kplate::history_slope(result.history));
  } catch (const kplate::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kirchhoff plate obstacle solver (Argyris elements, Nitsche contact)"};
  app.require_subcommand(1);
  SolveOptions options;
  CLI::App* solve = app.add_subcommand("solve", "solve one configured problem and write the run artifacts");
  solve->add_option("--config", options.config_path, "key = value configuration file");
  solve->add_option("--preset", options.preset, "rigid or elastic");
  solve->add_option("--eps", options.eps, "obstacle compliance");
  solve->add_option("--mode", options.mode, "uniform or adaptive");
  solve->add_option("--steps", options.steps, "number of solves");
  solve->add_option("--out", options.out, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  return run_solve(options);
}
