#pragma once

#include <optional>
#include <span>
#include <vector>

#include "coopvar/field.hpp"
#include "coopvar/grid.hpp"
#include "coopvar/linops.hpp"

namespace coopvar {

/// Immutable bundle for the scalar non-local problem on the full region.
struct Problem {
  const Grid* grid = nullptr;
  const ShiftedOperator* op = nullptr;  // full region
  const WeightField* weight = nullptr;
  NonlinearitySpec nl;
};

struct EnergyBreakdown {
  double dirichlet = 0.0;  //  1/2 int |grad u|^2
  double mass = 0.0;       // -lambda/2 int u^2
  double nonlocal = 0.0;   // -gamma/2 <u, (A-lambda)^{-1} u>
  double potential = 0.0;  //  int F(x,u)
  double total() const { return dirichlet + mass + nonlocal + potential; }
};

EnergyBreakdown energy(const Problem& p, std::span<const double> u, double gamma, double lambda);

/// Discrete L2 gradient: g_i = [(A-lambda)u - gamma (A-lambda)^{-1}u + a|u|^p u]_i h^d.
std::vector<double> energy_gradient(const Problem& p, std::span<const double> u, double gamma,
                                    double lambda);

enum class SolveStatus {
  converged_positive,
  converged_to_zero,
  converged_nonpositive,  // critical point with a sign change; not a coexistence state
  diverged,
};

const char* solve_status_name(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::converged_to_zero;
  std::vector<double> u, v;
  double gamma = 0.0, lambda = 0.0;
  double alpha = 0.0, beta = 0.0;
  EnergyBreakdown breakdown;
  double energy = 0.0;
  double grad_norm = 0.0;        // Euclidean norm of the discrete gradient
  double newton_residual = 0.0;  // relative to the residual's constituent terms
  double positivity_margin = 0.0;
  int gd_iterations = 0;
  int newton_iterations = 0;
};

struct SolveOpts {
  // Descent runs until the relative strong-form residual reaches gd_tol (basin
  // capture) or the iteration budget runs out; Newton then drives the result
  // to newton_tol, far below the reporting thresholds.
  double gd_tol = 1e-3;
  int gd_max_iters = 50000;
  double newton_tol = 1e-12;     // relative
  int newton_max_iters = 60;
  double blowup_cap = 1e8;       // max-norm trigger for DIVERGENCE_DETECTED
  double zero_tol = 1e-10;       // max-norm collapse trigger, relative to start
  double beta = 0.0;             // 0 -> sqrt(gamma); used to recover v
  bool newton_polish = true;
};

/// Relative strong-form residual of the non-local equation at u.
double relative_residual(const Problem& p, std::span<const double> u, double gamma, double lambda);

/// Gradient descent with Armijo backtracking, then Newton polish. Empty init
/// selects t0 * phi1 with t0 sized so the quadratic part dominates.
SolveResult minimize_energy(const Problem& p, double gamma, double lambda,
                            std::span<const double> init = {}, const SolveOpts& opts = {});

/// Newton iteration on the strong form; the Jacobian applies
/// (A-lambda) - gamma (A-lambda)^{-1} + a(f + u f_u) with a dense outer solve.
SolveResult newton_solve(const Problem& p, double gamma, double lambda,
                         std::span<const double> init, const SolveOpts& opts = {});

/// Dense Newton Jacobian at u (desk scale only).
Eigen::MatrixXd dense_jacobian(const Problem& p, std::span<const double> u, double gamma,
                               double lambda);

std::vector<double> recover_v(const ShiftedOperator& op, std::span<const double> u, double lambda,
                              double beta);

/// Max-norm residuals of the two coupled equations at (u, v).
std::pair<double, double> system_residual(const Problem& p, std::span<const double> u,
                                          std::span<const double> v, double alpha, double beta,
                                          double lambda);

/// min over nodes of sqrt(alpha) v - sqrt(beta) u; positive for coexistence pairs.
double ordering_margin(std::span<const double> u, std::span<const double> v, double alpha,
                       double beta);

struct UniquenessReport {
  int n_starts = 0;
  int positive_count = 0;
  int zero_count = 0;
  int diverged_count = 0;
  int distinct_positive = 0;
  double max_pair_distance = 0.0;  // over solutions clustered as identical
  double ordering_margin = 0.0;    // of the representative pair
  std::vector<SolveResult> representatives;
};

/// Multi-start probe: random positive initializations with log-uniform
/// amplitude in [1e-2, 1e2]; distinct solutions separated at 1e-6 relative
/// max-norm.
UniquenessReport uniqueness_probe(const Problem& p, double gamma, double lambda, int n_starts,
                                  std::uint64_t seed, const SolveOpts& opts = {});

}  // namespace coopvar
