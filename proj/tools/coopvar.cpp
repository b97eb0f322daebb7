#include <CLI11.hpp>
#include <cstdio>
#include <optional>
#include <string>

#include "coopvar/config.hpp"
#include "coopvar/errors.hpp"
#include "coopvar/tasks.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma, lambda, alpha, beta, p;
  std::optional<int> starts, points;
};

int run(const std::string& task_name, const CommonArgs& args) {
  coopvar::ExperimentConfig cfg;
  try {
    cfg = coopvar::load_config_file(args.config_path);
  } catch (const coopvar::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
  if (!cfg.task.name.empty() && cfg.task.name != task_name) {
    std::fprintf(stderr, "CONFIG_INVALID: config task '%s' does not match subcommand '%s'\n",
                 cfg.task.name.c_str(), task_name.c_str());
    return 2;
  }
  cfg.task.name = task_name;
  if (args.seed) cfg.solver.seed = *args.seed;
  if (args.gamma) cfg.task.gamma = *args.gamma;
  if (args.lambda) {
    cfg.task.lambda = *args.lambda;
    cfg.task.lambda_frac.reset();
  }
  if (args.alpha) cfg.task.alpha = *args.alpha;
  if (args.beta) cfg.task.beta = *args.beta;
  if (args.p) cfg.nl.p = *args.p;
  if (args.starts) cfg.solver.n_starts = *args.starts;
  if (args.points) cfg.task.n_points = *args.points;

  const auto outcome = coopvar::run_task(cfg, args.out_dir);
  if (!outcome.error.empty()) std::fprintf(stderr, "%s\n", outcome.error.c_str());
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coopvar: discrete spectral bounds, non-local solves, and branch "
               "continuation for a cooperative elliptic system"};
  app.require_subcommand(1);

  CommonArgs args;
  const char* tasks[] = {"spectra", "sigma-bound", "solve", "branch", "bifurcation",
                         "cross-validate"};
  for (const char* name : tasks) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", args.out_dir, "output directory")->required();
    sub->add_option("--seed", args.seed, "override solver.seed");
    if (std::string(name) == "solve" || std::string(name) == "branch") {
      sub->add_option("--gamma", args.gamma, "coupling strength alpha*beta");
      sub->add_option("--lambda", args.lambda, "spectral shift");
      sub->add_option("--p", args.p, "nonlinearity exponent");
      sub->add_option("--alpha", args.alpha, "first coupling coefficient");
      sub->add_option("--beta", args.beta, "second coupling coefficient");
    }
    if (std::string(name) == "solve")
      sub->add_option("--starts", args.starts, "multi-start count for the uniqueness probe");
    if (std::string(name) == "branch")
      sub->add_option("--points", args.points, "branch points");
    if (std::string(name) == "cross-validate") {
      sub->add_option("--alpha", args.alpha, "first coupling coefficient");
      sub->add_option("--beta", args.beta, "second coupling coefficient");
    }
  }

  CLI11_PARSE(app, argc, argv);
  return run(app.get_subcommands().front()->get_name(), args);
}
