#pragma once

#include <span>
#include <vector>

#include "coopvar/nonlocal.hpp"
#include "coopvar/system.hpp"

namespace coopvar {

/// Coupled functional of the two-component formulation:
/// (1/2a) |grad u|^2 + (1/2b) |grad v|^2 - (l/2a) u^2 - (l/2b) v^2 - uv + (1/a) F(x,u),
/// integrated with the grid quadrature.
double energy_coupled(const Problem& p, std::span<const double> u, std::span<const double> v,
                      double lambda, double alpha, double beta);

/// Discrete L2 gradient of the coupled functional, (d/du, d/dv).
std::pair<std::vector<double>, std::vector<double>> coupled_gradient(
    const Problem& p, std::span<const double> u, std::span<const double> v, double lambda,
    double alpha, double beta);

struct CoupledState {
  SolveStatus status = SolveStatus::converged_to_zero;
  std::vector<double> u, v;
  double lambda = 0.0, alpha = 0.0, beta = 0.0;
  double energy_J = 0.0;
  double residual_1 = 0.0, residual_2 = 0.0;  // max-norm against the coupled system
  double positivity_margin = 0.0;
  int gd_iterations = 0;
  int newton_iterations = 0;
};

/// Joint gradient descent plus Newton on the coupled Euler-Lagrange system.
CoupledState minimize_coupled(const Problem& p, double lambda, double alpha, double beta,
                              std::span<const double> init_u = {},
                              std::span<const double> init_v = {}, const SolveOpts& opts = {});

/// Existence interval of the alternative formulation:
/// (sigma1 - sqrt(ab), principal eigenvalue of the symmetric block on the zero set).
/// Empty when lo >= hi.
struct LambdaInterval {
  double lo = 0.0, hi = 0.0;
  bool empty() const { return !(lo < hi); }
};
LambdaInterval lambda_interval(const System& sys, double alpha, double beta);

struct CrossValidation {
  double lambda = 0.0, alpha = 0.0, beta = 0.0, gamma = 0.0;
  bool nonlocal_admissible = false;  // lambda < sigma1
  bool exists_nonlocal = false;
  bool exists_coupled = false;
  bool in_alt_interval = false;
  bool existence_disagreement = false;
  double agreement_u = 0.0, agreement_v = 0.0;  // relative max-norm, when both exist
  std::string status_nonlocal, status_coupled;
};

/// Solves the same parameter point through both formulations and compares.
CrossValidation cross_validate(const System& sys, double lambda, double alpha, double beta,
                               const SolveOpts& opts = {});

}  // namespace coopvar
