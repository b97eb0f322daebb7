#include "coopvar/continuation.hpp"

#include <algorithm>
#include <cmath>

#include "coopvar/errors.hpp"
#include "coopvar/kernels.hpp"
#include "coopvar/spectra.hpp"

namespace coopvar {

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::reached_hi: return "REACHED_HI";
    case Termination::blowup_cap: return "BLOWUP_CAP";
    case Termination::step_underflow: return "STEP_UNDERFLOW";
  }
  return "UNKNOWN";
}

std::vector<int> core_zero_nodes(const Grid& grid, double margin) {
  std::vector<int> out;
  for (int idx = 0; idx < grid.total_nodes(); ++idx) {
    if (grid.tag[idx] != Tag::zero) continue;
    if (-grid.signed_distance(idx) > margin && grid.boundary_distance(idx) > margin) {
      out.push_back(idx);
    }
  }
  return out;
}

std::pair<double, double> existence_interval(const System& sys, double lambda) {
  const double s1 = sys.full->smallest_eigenvalue();
  if (lambda >= s1) fail(errc::shift_not_admissible, "lambda >= sigma1 in existence_interval");
  SpectralBoundOpts opts;
  opts.cone_samples = 0;
  const auto sb = spectral_bound(*sys.full, *sys.zero, lambda, opts);
  return {(s1 - lambda) * (s1 - lambda), sb.value};
}

namespace {

BranchPoint make_point(const System& sys, SolveResult&& sol, const std::vector<int>& core) {
  BranchPoint p;
  p.sup_u = kern::max_abs(sol.u);
  p.sup_v = kern::max_abs(sol.v);
  double mn = std::numeric_limits<double>::infinity();
  for (int idx : core) mn = std::min(mn, sol.u[idx]);
  p.min_u_core = core.empty() ? 0.0 : mn;
  double plus_mass = 0.0, total = 0.0;
  for (int i = 0; i < static_cast<int>(sol.u.size()); ++i) {
    const double w = sol.u[i] * sol.u[i];
    total += w;
    if (sys.grid.tag[i] == Tag::plus) plus_mass += w;
  }
  p.mass_frac_plus = total > 0.0 ? plus_mass / total : 0.0;
  p.sol = std::move(sol);
  return p;
}

// Advance the branch from (gamma_cur, u_cur) to gamma_target, inserting
// intermediate solves when Newton loses the target. Returns the solve at the
// target, or a status explaining why the branch ends here.
struct AdvanceResult {
  bool ok = false;
  bool blowup = false;
  bool underflow = false;
  SolveResult sol;
};

AdvanceResult advance(const Problem& prob, double lambda, double gamma_cur,
                      std::vector<double>& u_cur, double gamma_target, double width,
                      double min_rel_step, const SolveOpts& sopts) {
  AdvanceResult out;
  double from = gamma_cur;
  int guard = 0;
  while (guard++ < 200) {
    double target = gamma_target;
    bool solved = false;
    SolveResult sol;
    while (true) {
      try {
        sol = newton_solve(prob, target, lambda, u_cur, sopts);
      } catch (const Error&) {
        sol.status = SolveStatus::diverged;  // treat as a lost target; retry closer
        sol.gamma = target;
      }
      if (sol.status == SolveStatus::converged_positive) {
        solved = true;
        break;
      }
      if (sol.status == SolveStatus::diverged && kern::max_abs(sol.u) > sopts.blowup_cap) {
        out.blowup = true;
      }
      target = 0.5 * (from + target);
      if ((target - from) / width < min_rel_step) {
        out.underflow = !out.blowup;
        return out;
      }
    }
    if (solved) {
      u_cur = sol.u;
      from = target;
      if (target == gamma_target) {
        out.ok = true;
        out.sol = std::move(sol);
        return out;
      }
    }
  }
  out.underflow = true;
  return out;
}

}  // namespace

Branch trace_branch(const System& sys, double lambda, const BranchOpts& opts) {
  Branch br;
  br.lambda = lambda;
  std::tie(br.gamma_lo, br.gamma_hi) = existence_interval(sys, lambda);
  const Problem prob = sys.problem();
  const auto core = core_zero_nodes(sys.grid, 2.0 * sys.grid.h[0]);

  const int m = std::max(2, opts.n_points);
  const double gamma_start = br.gamma_lo * (1.0 + opts.first_offset);
  const double d1 = br.gamma_hi - gamma_start;
  const double dm = br.gamma_hi * opts.last_rel_gap;
  const double rho = std::pow(dm / d1, 1.0 / (m - 1));
  const double width = br.gamma_hi - br.gamma_lo;

  SolveResult first = minimize_energy(prob, gamma_start, lambda, {}, opts.solve);
  if (first.status != SolveStatus::converged_positive) {
    br.termination = first.status == SolveStatus::diverged ? Termination::blowup_cap
                                                           : Termination::step_underflow;
    return br;
  }
  std::vector<double> u_cur = first.u;
  double gamma_cur = gamma_start;
  br.points.push_back(make_point(sys, std::move(first), core));

  for (int k = 1; k < m; ++k) {
    const double gamma_k = br.gamma_hi - d1 * std::pow(rho, k);
    auto adv = advance(prob, lambda, gamma_cur, u_cur, gamma_k, width, opts.min_rel_step,
                       opts.solve);
    if (!adv.ok) {
      br.termination = adv.blowup ? Termination::blowup_cap : Termination::step_underflow;
      return br;
    }
    gamma_cur = gamma_k;
    br.points.push_back(make_point(sys, std::move(adv.sol), core));
  }
  br.termination = Termination::reached_hi;
  return br;
}

BifurcationReport locate_bifurcation(const ShiftedOperator& full, double lambda) {
  const auto fac = full.factorization(lambda);
  const int n = full.size();

  // Largest eigenvalue of (A - lambda)^{-2} by power iteration.
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), y(n), t(n);
  double theta = 0.0;
  for (int it = 0; it < 100000; ++it) {
    fac->solve(x, t);
    fac->solve(t, y);
    theta = kern::dot(x, y);
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = y[i] - theta * x[i];
      r2 += d * d;
    }
    const double ny = std::sqrt(kern::dot(y, y));
    for (int i = 0; i < n; ++i) x[i] = y[i] / ny;
    if (std::sqrt(r2) <= 1e-14 * theta) break;
  }

  const auto crossing = [theta](double gamma) { return 1.0 - gamma * theta; };

  double a = 0.0, b = 1.0;
  int doublings = 0;
  while (crossing(b) > 0.0) {
    b *= 2.0;
    if (++doublings > 200) fail(errc::bracket_failed, "no sign change while bracketing");
  }
  if (crossing(a) <= 0.0) fail(errc::bracket_failed, "left bracket not positive");

  BifurcationReport rep;
  rep.theta = theta;
  int it = 0;
  while ((b - a) > 1e-13 * b && it < 500) {
    const double mid = 0.5 * (a + b);
    (crossing(mid) > 0.0 ? a : b) = mid;
    ++it;
  }
  rep.bisect_iters = it;
  rep.gamma_star = 0.5 * (a + b);
  const double delta = 1e-6 * rep.gamma_star;
  rep.slope_fd = (crossing(rep.gamma_star + delta) - crossing(rep.gamma_star - delta)) /
                 (2.0 * delta);
  return rep;
}

DerivativeReport branch_derivative_check(const System& sys, const SolveResult& point,
                                         double delta_gamma_rel, const SolveOpts& opts) {
  const Problem prob = sys.problem();
  const int n = sys.full->size();
  const Eigen::MatrixXd jac = dense_jacobian(prob, point.u, point.gamma, point.lambda);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
  const auto& diag = lu.matrixLU().diagonal();
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (int i = 0; i < n; ++i) {
    dmin = std::min(dmin, std::abs(diag[i]));
    dmax = std::max(dmax, std::abs(diag[i]));
  }
  if (dmin <= 1e-14 * dmax) fail(errc::jacobian_singular, "branch Jacobian singular");

  const auto su = sys.full->solve(point.lambda, point.u);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = su[i];
  const Eigen::VectorXd w = lu.solve(rhs);

  const double dg = delta_gamma_rel * point.gamma;
  const auto up = newton_solve(prob, point.gamma + dg, point.lambda, point.u, opts);
  const auto dn = newton_solve(prob, point.gamma - dg, point.lambda, point.u, opts);

  DerivativeReport rep;
  rep.min_w = w.minCoeff();
  rep.w_maxnorm = w.cwiseAbs().maxCoeff();
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    const double fd = (up.u[i] - dn.u[i]) / (2.0 * dg);
    err = std::max(err, std::abs(w[i] - fd));
  }
  rep.fd_rel_err = err / rep.w_maxnorm;
  return rep;
}

BlowupReport blowup_probe(const System& sys, double lambda, const BlowupOpts& opts) {
  BlowupReport rep;
  rep.lambda = lambda;
  const auto [gamma_lo, gamma_hi] = existence_interval(sys, lambda);
  rep.gamma_hi = gamma_hi;
  const Problem prob = sys.problem();
  const auto core = core_zero_nodes(sys.grid, 2.0 * sys.grid.h[0]);

  SpectralBoundOpts sbopts;
  sbopts.cone_samples = 0;
  const auto sb = spectral_bound(*sys.full, *sys.zero, lambda, sbopts);
  const auto& profile = sb.zero_extension.values;
  const double profile_norm = std::sqrt(kern::dot(profile, profile));

  const int m = std::max(2, opts.n_points);
  const double ratio = std::pow(opts.gap_end / opts.gap_start, 1.0 / (m - 1));
  const double width = gamma_hi - gamma_lo;

  double gamma_first = gamma_hi * (1.0 - opts.gap_start);
  if (gamma_first <= gamma_lo) gamma_first = 0.5 * (gamma_lo + gamma_hi);
  SolveResult cur = minimize_energy(prob, gamma_first, lambda, {}, opts.solve);
  if (cur.status != SolveStatus::converged_positive) return rep;
  std::vector<double> u_cur = cur.u;
  double gamma_cur = gamma_first;

  for (int k = 0; k < m; ++k) {
    const double gap = opts.gap_start * std::pow(ratio, k);
    const double gamma_k = gamma_hi * (1.0 - gap);
    if (gamma_k <= gamma_cur && k > 0) continue;
    auto adv = advance(prob, lambda, gamma_cur, u_cur, gamma_k, width, 1e-12, opts.solve);
    if (!adv.ok) {
      rep.hit_cap = adv.blowup;
      break;
    }
    gamma_cur = gamma_k;
    BlowupSample s;
    s.gamma = gamma_k;
    s.rel_gap = gap;
    s.sup_u = kern::max_abs(adv.sol.u);
    double mn = std::numeric_limits<double>::infinity();
    for (int idx : core) mn = std::min(mn, adv.sol.u[idx]);
    s.min_u_core = core.empty() ? 0.0 : mn;
    double plus_mass = 0.0, total = 0.0;
    for (int i = 0; i < static_cast<int>(adv.sol.u.size()); ++i) {
      const double w = adv.sol.u[i] * adv.sol.u[i];
      total += w;
      if (sys.grid.tag[i] == Tag::plus) plus_mass += w;
    }
    s.mass_frac_plus = plus_mass / total;
    const double un = std::sqrt(total);
    s.cosine_with_bound_profile = kern::dot(adv.sol.u, profile) / (un * profile_norm);
    rep.samples.push_back(s);
    u_cur = adv.sol.u;
  }
  return rep;
}

}  // namespace coopvar
