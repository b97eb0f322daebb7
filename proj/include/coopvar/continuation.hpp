#pragma once

#include <vector>

#include "coopvar/nonlocal.hpp"
#include "coopvar/system.hpp"

namespace coopvar {

enum class Termination { reached_hi, blowup_cap, step_underflow };
const char* termination_name(Termination t);

struct BranchPoint {
  SolveResult sol;
  double sup_u = 0.0, sup_v = 0.0;
  double min_u_core = 0.0;      // min over the interior compact of the zero set
  double mass_frac_plus = 0.0;  // L2 mass fraction of u on the positive set
};

struct Branch {
  double lambda = 0.0;
  double gamma_lo = 0.0, gamma_hi = 0.0;
  std::vector<BranchPoint> points;
  Termination termination = Termination::reached_hi;
};

struct BranchOpts {
  int n_points = 24;
  double first_offset = 1e-3;   // gamma_1 = gamma_lo * (1 + first_offset)
  double last_rel_gap = 1e-3;   // gamma_n = gamma_hi * (1 - last_rel_gap)
  double min_rel_step = 1e-6;   // of the interval width; below this, stop
  SolveOpts solve;
};

/// Existence interval ((sigma1 - lambda)^2, Sigma(lambda)).
std::pair<double, double> existence_interval(const System& sys, double lambda);

/// Natural-parameter continuation over a gamma grid geometrically refined
/// toward gamma_hi, warm-starting each Newton solve from the previous point.
Branch trace_branch(const System& sys, double lambda, const BranchOpts& opts = {});

struct BifurcationReport {
  double gamma_star = 0.0;
  double slope_fd = 0.0;   // d/dgamma of the crossing eigenvalue at gamma_star
  double theta = 0.0;      // largest eigenvalue of (A - lambda I)^{-2}
  int bisect_iters = 0;
};

/// Locates the gamma where the smallest eigenvalue of I - gamma (A-lambda)^{-2}
/// crosses zero, by bisection.
BifurcationReport locate_bifurcation(const ShiftedOperator& full, double lambda);

struct DerivativeReport {
  double min_w = 0.0;       // implicit-function derivative, nodewise minimum
  double fd_rel_err = 0.0;  // against the centered difference in gamma
  double w_maxnorm = 0.0;
};

/// Implicit-function derivative of the branch in gamma at a converged point,
/// checked against a centered finite difference.
DerivativeReport branch_derivative_check(const System& sys, const SolveResult& point,
                                         double delta_gamma_rel = 1e-4,
                                         const SolveOpts& opts = {});

struct BlowupSample {
  double gamma = 0.0;
  double rel_gap = 0.0;  // (gamma_hi - gamma) / gamma_hi
  double sup_u = 0.0;
  double min_u_core = 0.0;
  double mass_frac_plus = 0.0;
  double cosine_with_bound_profile = 0.0;
};

struct BlowupOpts {
  int n_points = 12;
  double gap_start = 0.3;
  double gap_end = 1e-8;
  SolveOpts solve;
};

struct BlowupReport {
  double lambda = 0.0;
  double gamma_hi = 0.0;
  std::vector<BlowupSample> samples;
  bool hit_cap = false;
};

/// Pushes gamma toward gamma_hi along a geometric gap sequence and records
/// how the solution concentrates on the zero set.
BlowupReport blowup_probe(const System& sys, double lambda, const BlowupOpts& opts = {});

/// Zero-region nodes at distance greater than `margin` from both the tag
/// interface and the outer boundary.
std::vector<int> core_zero_nodes(const Grid& grid, double margin);

}  // namespace coopvar
