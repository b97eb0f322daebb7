#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopvar/grid.hpp"
#include "coopvar/nonlocal.hpp"

namespace coopvar {

struct SolverConfig {
  double gd_tol = 1e-6;
  double newton_tol = 1e-12;
  double eig_tol = 1e-10;
  int gd_max_iters = 200000;
  int newton_max_iters = 60;
  int eig_max_iters = 10000;
  double blowup_cap = 1e8;
  int n_starts = 20;
  std::uint64_t seed = 12345;

  SolveOpts solve_opts() const;
};

struct TaskConfig {
  std::string name;  // spectra | sigma-bound | solve | branch | bifurcation | cross-validate
  std::optional<double> lambda;       // absolute shift
  std::optional<double> lambda_frac;  // shift as a fraction of sigma1
  std::vector<double> lambda_fracs{0.0, 0.25, 0.5};
  std::optional<double> gamma;
  std::optional<double> alpha;
  std::optional<double> beta;
  int n_points = 24;
  int n_samples = 200;
  int n_lambda = 7;
  bool svg = true;
};

struct ExperimentConfig {
  int dimension = 1;
  std::array<double, 2> lo{0.0, 0.0}, hi{1.0, 1.0};
  std::array<int, 2> n{65, 1};
  Omega0Spec omega0;
  WeightField::Profile weight_profile = WeightField::Profile::mollified_bump;
  double weight_amplitude = 1.0;
  NonlinearitySpec nl;
  SolverConfig solver;
  TaskConfig task;

  /// Canonical JSON image of the effective configuration (hashing, manifest).
  nlohmann::json to_json() const;
};

/// Strict parse: unknown keys are rejected with field-level messages, all
/// collected into one CONFIG_INVALID error.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace coopvar
